//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use ethweyl::basis::FockBasis;
use ethweyl::jfunc::{j_analytic, j_from_tilde, Domain, JKind, JTilde};
use ethweyl::lmg::{self, LmgParams, PhasePoint};
use ethweyl::oracle1d::{default_suite, ho_eigenfunction, wigner_transform, Grid, OracleConfig};
use ethweyl::semiclassics::{sample_shell, semiclassical_profile, ClassicalModel, LmgModel, PredictorConfig};
use ethweyl::spectral::{self, band_profile, fit_scaling, BandProfile, DensityOfStates, FitModel, ProfileConfig};
use ethweyl::weylcalc::{Monomial, OperatorWord, PhasePolynomial};
use ethweyl::Complex64;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Mid-spectrum quantities of one LMG diagonalization.
struct MidBand {
    hbar: f64,
    e: f64,
    rho: f64,
    profile: BandProfile,
}

fn mid_band(params: LmgParams) -> MidBand {
    let basis = FockBasis::new(params.omega).unwrap();
    let h = lmg::build_hamiltonian(&params, &basis).unwrap();
    let s = spectral::diagonalize(&h).unwrap();
    let o = spectral::eigenbasis_elements(&basis.matrix_observable_a(), &s).unwrap();
    let lv = &s.values;
    let e = 0.5 * (lv[0] + lv[lv.len() - 1]);
    let rho = DensityOfStates::with_default_window(lv).unwrap().eval(e);
    let profile = band_profile(&o, lv, e, &ProfileConfig::default()).unwrap();
    MidBand { hbar: params.hbar_eff(), e, rho, profile }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let r = default_suite(&OracleConfig::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let pass = r.all_pass && r.max_rel_err < 1e-3 && secs < 120.0;
    outcome(pass, format!("{} cases, max rel err {:.2e}, {secs:.1} s", r.cases.len(), r.max_rel_err))
}

fn random_poly(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32) -> PhasePolynomial {
    let nterms = rng.random_range(1..=4);
    let terms: Vec<(Monomial, Complex64)> = (0..nterms)
        .map(|_| {
            let mut e: Vec<u32> = (0..2 * dim).map(|_| rng.random_range(0..=max_deg)).collect();
            while e.iter().sum::<u32>() > max_deg {
                let i = e.iter().position(|&x| x > 0).unwrap();
                e[i] -= 1;
            }
            let m = Monomial { p: e[..dim].to_vec(), q: e[dim..].to_vec(), hbar: rng.random_range(0..=1) };
            (m, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        })
        .collect();
    PhasePolynomial::from_terms(dim, terms)
}

fn criterion_2() -> Outcome {
    let word: OperatorWord = "q p q p".parse().unwrap();
    let got = word.weyl_symbol();
    let mono = |p: u32, q: u32, h: u32| Monomial { p: vec![p], q: vec![q], hbar: h };
    let want = PhasePolynomial::from_terms(
        1,
        [
            (mono(2, 2, 0), Complex64::new(1.0, 0.0)),
            (mono(1, 1, 1), Complex64::new(0.0, 0.75)),
            (mono(0, 0, 2), Complex64::new(0.125, 0.0)),
        ],
    );
    let symbol_err = got.max_diff(&want);

    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let dim = 1 + k % 2;
        let (f, g, h) = (random_poly(&mut rng, dim, 6), random_poly(&mut rng, dim, 6), random_poly(&mut rng, dim, 6));
        let l = f.star(&g).unwrap().star(&h).unwrap();
        let r = f.star(&g.star(&h).unwrap()).unwrap();
        worst = worst.max(l.max_diff(&r) / l.max_abs_coeff().max(1.0));
    }
    let c = |p, q, h| got.coeff(&mono(p, q, h));
    let pass = symbol_err <= 1e-12 && worst <= 1e-10;
    outcome(
        pass,
        format!(
            "qpqp symbol deviation {symbol_err:.3e} (coefficients q²p² {}, ħqp {}, ħ² {}), associativity worst {worst:.2e}",
            c(2, 2, 0),
            c(1, 1, 1),
            c(0, 0, 2)
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let p1 = PhasePolynomial::p(1, 1);
    for _ in 0..100 {
        let base = [rng.random_range(-0.95..0.95), rng.random_range(-0.95..0.95)];
        let hbar = rng.random_range(0.01..0.1);
        let mut pick = || {
            let v: f64 = rng.random_range(0.01..0.5);
            if rng.random_bool(0.5) {
                v
            } else {
                -v
            }
        };
        let zp = [pick(), pick()];
        let jt = JTilde::new(&p1, &base, Domain::cube(1, 1.0)).unwrap();
        let exact = j_from_tilde(&jt, &zp, hbar).unwrap();
        let closed = j_analytic(JKind::P1Box, 1, &base, hbar).unwrap().eval(&zp[..1], &zp[1..]).unwrap();
        worst = worst.max(rel(exact, closed));
    }
    let jt = JTilde::new(&PhasePolynomial::q(1, 1), &[0.2, 0.5], Domain::cube(1, 1.0)).unwrap();
    let r: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| jt.pair_gaussian(h, 1.0).unwrap() / h).collect();
    let (lo, hi) = r.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = hi / lo - 1.0;
    outcome(worst < 1e-8 && spread < 0.05, format!("closed-form worst rel {worst:.2e}, J/ħ spread {spread:.2e}"))
}

fn criterion_4(m: &MidBand) -> Outcome {
    let bp = &m.profile;
    let c = bp.central_index();
    let vals: Vec<f64> = bp.values.iter().map(|v| v.unwrap_or(0.0)).collect();
    let central_max = vals.iter().all(|&v| v <= vals[c]);
    let outer = bp.values.iter().rposition(|v| v.is_some()).map(|k| vals[k]).unwrap_or(f64::NAN);
    let decades = (vals[c] / outer).log10();
    let n = vals.len();
    let asym = (0..n).map(|k| (vals[k] - vals[n - 1 - k]).abs()).fold(0.0, f64::max) / vals[c];
    let pass = central_max && decades >= 2.0 && asym < 1e-12;
    outcome(pass, format!("central max {central_max}, decay {decades:.2} decades over |ω| ≤ {:.2}, asymmetry {asym:.1e}", bp.omegas[n - 1]))
}

fn criterion_5(m: &MidBand) -> Outcome {
    let bp = &m.profile;
    let model = LmgModel(LmgParams::default().with_omega(60));
    let sc = semiclassical_profile(&model, &lmg::observable_symbol(), m.e, m.hbar, &bp.omegas, &PredictorConfig::default())
        .unwrap();
    let c = bp.central_index();
    let peak_ratio = sc.values[c] / bp.peak;
    let qw = bp.half_width.unwrap_or(f64::NAN);
    let sw = sc.half_width(bp.epsilon).unwrap_or(f64::NAN);
    let width_rel = (sw / qw - 1.0).abs();
    let pass = (0.5..=2.0).contains(&peak_ratio) && width_rel <= 0.3;
    outcome(
        pass,
        format!(
            "peak ratio {peak_ratio:.3} (pred {:.3e} ± {:.1e}, quantum {:.3e}); half-width pred {sw:.3} vs quantum {qw:.3} ({:.0}% off)",
            sc.values[c],
            sc.stderr[c],
            bp.peak,
            100.0 * width_rel
        ),
    )
}

fn linear_fit_line(xs: &[f64], ys: &[f64]) -> (ethweyl::spectral::Fit, String) {
    let fit = fit_scaling(xs, ys, FitModel::Linear).unwrap();
    let pts: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("({x:.4}, {y:.4})")).collect();
    (fit, pts.join(" "))
}

fn criterion_6(bands: &[MidBand]) -> Outcome {
    let xs: Vec<f64> = bands.iter().map(|b| b.hbar).collect();
    let ys: Vec<f64> = bands.iter().map(|b| b.profile.half_width.unwrap_or(f64::NAN)).collect();
    let (fit, pts) = linear_fit_line(&xs, &ys);
    let wmax = ys.iter().cloned().fold(0.0, f64::max);
    let icpt = fit.intercept.abs() / wmax;
    let pass = fit.slope > 0.0 && fit.r2 >= 0.9 && icpt <= 0.15;
    outcome(pass, format!("slope {:.3}, R² {:.3}, |intercept|/max {icpt:.3}; w_b(ħ) {pts}", fit.slope, fit.r2))
}

fn criterion_7(bands: &[(f64, MidBand)]) -> Outcome {
    let xs: Vec<f64> = bands.iter().map(|b| b.0).collect();
    let ys: Vec<f64> = bands.iter().map(|b| b.1.profile.half_width.unwrap_or(f64::NAN)).collect();
    let (fit, pts) = linear_fit_line(&xs, &ys);
    let pass = fit.slope > 0.0 && fit.r2 >= 0.8;
    outcome(pass, format!("slope {:.3}, R² {:.3}; w_b(a) {pts}", fit.slope, fit.r2))
}

fn criterion_8(bands: &[MidBand]) -> Outcome {
    let xs: Vec<f64> = bands.iter().map(|b| b.hbar).collect();
    let mean: Vec<f64> = bands.iter().map(|b| b.profile.mean_offdiag).collect();
    let rho: Vec<f64> = bands.iter().map(|b| b.rho).collect();
    let fm = fit_scaling(&xs, &mean, FitModel::Power).unwrap();
    let fr = fit_scaling(&xs, &rho, FitModel::Power).unwrap();
    let pass = (fm.exponent() - 2.0).abs() <= 0.3 && (fr.exponent() + 2.0).abs() <= 0.2;
    outcome(pass, format!("mean |O_ij|² exponent {:.3} (R² {:.3}), ρ exponent {:.3} (R² {:.3})", fm.exponent(), fm.r2, fr.exponent(), fr.r2))
}

fn max_abs(m: &Mat<f64>) -> f64 {
    let mut s = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s = s.max(m[(i, j)].abs());
        }
    }
    s
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let mut notes = Vec::new();

    let b = FockBasis::new(20).unwrap();
    let k: Vec<Vec<Mat<f64>>> = (0..3).map(|r| (0..3).map(|s| b.matrix_k(r, s).unwrap()).collect()).collect();
    let mut u3 = 0.0f64;
    for r in 0..3 {
        for s in 0..3 {
            for t in 0..3 {
                for u in 0..3 {
                    let mut d = &(&k[r][s] * &k[t][u]) - &(&k[t][u] * &k[r][s]);
                    if s == t {
                        d = &d - &k[r][u];
                    }
                    if u == r {
                        d = &d + &k[t][s];
                    }
                    u3 = u3.max(max_abs(&d));
                }
            }
        }
    }
    notes.push(format!("u(3) {u3:.1e}"));

    let h = lmg::build_hamiltonian(&LmgParams::default().with_omega(20), &b).unwrap();
    let s = spectral::diagonalize(&h).unwrap();
    let obs = b.matrix_observable_a();
    let o = spectral::eigenbasis_elements(&obs, &s).unwrap();
    let sq = &(s.vectors.transpose() * (obs.as_mat() * obs.as_mat())) * &s.vectors;
    let parseval = (0..s.dim())
        .map(|i| ((0..s.dim()).map(|j| o[(i, j)] * o[(i, j)]).sum::<f64>() - sq[(i, i)]).abs())
        .fold(0.0, f64::max);
    notes.push(format!("Parseval {parseval:.1e}"));

    let mut wig = 0.0f64;
    for hbar in [1.0f64, 0.5] {
        let t = 13f64.sqrt();
        let g = Grid::symmetric((4.0 * t).max(t + 7.0) * hbar.sqrt(), 256);
        for n in 0..=6 {
            let psi = ho_eigenfunction(n, hbar, g).unwrap();
            let w = wigner_transform(&psi, g).unwrap();
            wig = wig.max((w.total() - 1.0).abs());
            for (m, v) in w.q_marginal().iter().zip(&psi.values) {
                wig = wig.max((m - v.norm_sqr()).abs());
            }
        }
    }
    notes.push(format!("Wigner {wig:.1e}"));

    let model = LmgModel(LmgParams::default().with_omega(60));
    let (e, de) = (35.94, 0.4);
    let shell = sample_shell(&model, e, de, 5000, 9).unwrap();
    let bad = shell
        .points
        .iter()
        .filter(|z| {
            let h = model.h(z).unwrap();
            (h - e).abs() > 0.5 * de || !PhasePoint::from_array([z[0], z[1], z[2], z[3]]).is_physical()
        })
        .count();
    notes.push(format!("shell violations {bad}/{}", shell.points.len()));

    let secs = t.elapsed().as_secs_f64();
    let pass = u3 <= 1e-10 * 20.0 && parseval < 1e-12 && wig < 1e-8 && bad == 0 && secs < 300.0;
    outcome(pass, format!("{}, {secs:.1} s", notes.join(", ")))
}

fn report(n: usize, o: &Outcome) {
    println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut all = true;
    let mut run = |n: usize, o: Outcome| {
        report(n, &o);
        all &= o.pass;
    };
    run(1, criterion_1());
    run(2, criterion_2());
    run(3, criterion_3());

    let t = Instant::now();
    let omegas = [40u32, 50, 60, 80, 100];
    let bands: Vec<MidBand> = omegas.iter().map(|&om| mid_band(LmgParams::default().with_omega(om))).collect();
    let scan_secs = t.elapsed().as_secs_f64();
    let at60 = &bands[2];
    run(4, criterion_4(at60));
    run(5, criterion_5(at60));
    let mut c6 = criterion_6(&bands);
    c6.pass &= scan_secs <= 1800.0;
    c6.detail.push_str(&format!("; Ω-scan {scan_secs:.0} s"));
    run(6, c6);
    let scan_a: Vec<(f64, MidBand)> = [0.6, 0.8, 1.0, 1.2, 1.4]
        .iter()
        .map(|&a| (a, mid_band(LmgParams::default().with_omega(60).with_a(a))))
        .collect();
    run(7, criterion_7(&scan_a));
    run(8, criterion_8(&bands));
    run(9, criterion_9());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
