//! Microcanonical sampling, the off-diagonal predictor and bandwidth
//! estimates, checked against analytic stubs, an independent grid oracle
//! for uncoupled oscillators, and internal consistency on LMG.

use ethweyl::error::Result;
use ethweyl::lmg::{self, LmgParams};
use ethweyl::oracle1d::{ho_eigenfunctions, Grid};
use ethweyl::semiclassics::*;
use ethweyl::spectral::{fit_scaling, FitModel};
use ethweyl::weylcalc::PhasePolynomial;
use ethweyl::Complex64;

use std::f64::consts::PI;

const E_MID: f64 = 35.94;

fn lmg() -> LmgModel {
    LmgModel(LmgParams::default().with_omega(60))
}

/// Two unit-frequency oscillators centred at `±3` on the `q` axis.
struct TwoWells;

impl ClassicalModel for TwoWells {
    fn dim(&self) -> usize {
        1
    }
    fn radius(&self) -> f64 {
        5.0
    }
    fn h(&self, z: &[f64]) -> Result<f64> {
        let c = if z[1] >= 0.0 { 3.0 } else { -3.0 };
        Ok(0.5 * (z[0] * z[0] + (z[1] - c).powi(2)))
    }
    fn grad(&self, z: &[f64]) -> Result<Vec<f64>> {
        let c = if z[1] >= 0.0 { 3.0 } else { -3.0 };
        Ok(vec![z[0], z[1] - c])
    }
}

#[test]
fn stub_shell_geometry() {
    let m = IsotropicStub { dim: 1, radius: 2.0 };
    let s = sample_shell(&m, 0.5, 0.01, 20_000, 11).unwrap();
    for z in &s.points {
        let r = z[0].hypot(z[1]);
        // |H − E| ≤ ΔE/2 with |∇H| = r means |r − 1| ≲ ΔE/2.
        assert!((r - 1.0).abs() <= 0.0051, "r = {r}");
    }
    let a = surface_area(&s).unwrap();
    assert!((a.value / (2.0 * PI) - 1.0).abs() < 0.02, "{a:?}");
    for e in [0.2, 1.2] {
        let a = surface_area(&sample_shell(&m, e, 0.01, 5000, 3).unwrap()).unwrap();
        assert!((a.value / (2.0 * PI) - 1.0).abs() < 0.03, "E={e}: {a:?}");
    }
}

#[test]
fn surface_adds_over_disjoint_components() {
    let one = surface_area(&sample_shell(&IsotropicStub { dim: 1, radius: 5.0 }, 0.5, 0.02, 4000, 5).unwrap()).unwrap();
    let two = surface_area(&sample_shell(&TwoWells, 0.5, 0.02, 8000, 5).unwrap()).unwrap();
    let ratio = two.value / one.value;
    assert!((ratio - 2.0).abs() < 4.0 * (two.stderr / one.value + 2.0 * one.stderr / one.value), "{ratio}");
}

#[test]
fn stub_gradient_norms() {
    let m = IsotropicStub { dim: 2, radius: 2.0 };
    let s = sample_shell(&m, 0.5, 0.01, 4000, 2).unwrap();
    let g = mean_grad_norm(&s, &m, Restrict::Full).unwrap();
    assert!((g.value - 1.0).abs() < 0.01, "{g:?}");
    // An A-only Hamiltonian has no B-gradient to drop.
    let a_only = SeparableStub { omega_b: 0.0, radius: 2.0 };
    let s = sample_shell(&a_only, 0.5, 0.01, 4000, 2).unwrap();
    let full = mean_grad_norm(&s, &a_only, Restrict::Full).unwrap();
    let sub = mean_grad_norm(&s, &a_only, Restrict::SubsystemA).unwrap();
    assert_eq!(full.value, sub.value);
}

#[test]
fn lmg_shell_is_stable_under_thickness_halving() {
    let m = lmg();
    let wide = sample_shell(&m, E_MID, 0.4, 20_000, 1).unwrap();
    let thin = sample_shell(&m, E_MID, 0.2, 20_000, 2).unwrap();
    let (a, b) = (surface_area(&wide).unwrap(), surface_area(&thin).unwrap());
    assert!((a.value / b.value - 1.0).abs() < 0.03, "{a:?} {b:?}");
    let (ga, gb) =
        (mean_grad_norm(&wide, &m, Restrict::Full).unwrap(), mean_grad_norm(&thin, &m, Restrict::Full).unwrap());
    assert!((ga.value - gb.value).abs() < 2.0 * ga.stderr.hypot(gb.stderr), "{ga:?} {gb:?}");
    for z in thin.points.iter().chain(&wide.points) {
        assert!(z.iter().map(|x| x * x).sum::<f64>() <= 2.0);
    }
}

#[test]
fn lmg_surface_from_curves_matches_shell_volume() {
    let m = lmg();
    let shell = surface_area(&sample_shell(&m, E_MID, 0.2, 20_000, 4).unwrap()).unwrap();
    let cfg = PredictorConfig { n_zb: 400, ..Default::default() };
    let p = semiclassical_profile(&m, &lmg::observable_symbol(), E_MID, 1.0 / 60.0, &[0.0], &cfg).unwrap();
    let rel = (p.surface.value / shell.value - 1.0).abs();
    assert!(rel < 3.0 * (p.surface.stderr / p.surface.value).hypot(shell.stderr / shell.value) + 0.01, "{:?} {shell:?}", p.surface);
}

#[test]
fn lmg_surface_is_positive_across_the_band() {
    let m = lmg();
    let mut prev = None;
    for e in [10.0, 20.0, 30.0, 40.0, 50.0, 60.0] {
        let s = surface_area(&sample_shell(&m, e, 0.4, 4000, 9).unwrap()).unwrap();
        assert!(s.value > 0.0);
        if let Some(p) = prev {
            let r: f64 = s.value / p;
            assert!(r > 0.3 && r < 3.0, "jump at E={e}: {r}");
        }
        prev = Some(s.value);
    }
}

#[test]
fn lmg_subsystem_gradient_grows_with_a() {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for a in [0.5, 0.75, 1.0, 1.25, 1.5] {
        let m = LmgModel(LmgParams::default().with_omega(60).with_a(a));
        let s = sample_shell(&m, E_MID, 0.4, 8000, 21).unwrap();
        xs.push(a);
        ys.push(mean_grad_norm(&s, &m, Restrict::SubsystemA).unwrap().value);
    }
    assert!(ys.windows(2).all(|w| w[1] > w[0]), "{ys:?}");
    let fit = fit_scaling(&xs, &ys, FitModel::Linear).unwrap();
    assert!(fit.r2 > 0.95, "{fit:?}");
}

fn q1() -> PhasePolynomial {
    PhasePolynomial::q(2, 1)
}

/// Uncoupled oscillators with `O = q_1`: each state `|n_1 n_2⟩` has
/// `Σ_j |O_ij|² = Σ_m |⟨n_1|q|m⟩|²`, computed here on a grid, with `j`
/// restricted to the same `n_2`. The prediction must reproduce the shell
/// average of this sum through `ρ(e)·∫P dω`.
#[test]
fn separable_oracle_normalization() {
    let (hbar, e, window) = (0.05, 1.0, 0.1);
    let omega_b = 2f64.sqrt();
    let model = SeparableStub { omega_b, radius: 2.0 };
    let grid = Grid::symmetric(7.0, 1024);
    let nmax = 30;
    let psi = ho_eigenfunctions(nmax, hbar, grid).unwrap();
    let xs = grid.points();
    let row_sum = |n: usize| -> f64 {
        let mut qpsi = psi[n].clone();
        for (v, x) in qpsi.values.iter_mut().zip(&xs) {
            *v *= Complex64::new(*x, 0.0);
        }
        (0..=nmax).filter(|&m| m != n).map(|m| psi[m].inner(&qpsi).norm_sqr()).sum()
    };
    let (mut sum, mut count) = (0.0, 0usize);
    for n1 in 0..nmax - 2 {
        for n2 in 0..40 {
            let en = hbar * (n1 as f64 + 0.5) + omega_b * hbar * (n2 as f64 + 0.5);
            if (en - e).abs() <= 0.5 * window {
                sum += row_sum(n1);
                count += 1;
            }
        }
    }
    assert!(count > 10, "{count} states in the window");
    let quantum = sum / count as f64;
    let p = semiclassical_profile(&model, &q1(), e, hbar, &[0.5], &PredictorConfig { n_zb: 400, ..Default::default() })
        .unwrap();
    assert!(p.values[0].is_nan(), "unbounded A has no finite-domain profile");
    let predicted = p.density_of_states() * p.weight.value;
    let ratio = predicted / quantum;
    assert!((0.8..=1.25).contains(&ratio), "predicted {predicted}, quantum {quantum}");
}

#[test]
fn constant_observable_sum_rule() {
    let m = lmg();
    let c = 0.7;
    let o = PhasePolynomial::constant(2, Complex64::new(c, 0.0));
    let cfg = PredictorConfig { n_zb: 64, ..Default::default() };
    let p = semiclassical_profile(&m, &o, E_MID, 1.0 / 60.0, &[0.0, 0.5], &cfg).unwrap();
    assert!((p.density_of_states() * p.weight.value - c * c).abs() < 1e-12);
    let one = semiclassical_profile(&m, &PhasePolynomial::one(2), E_MID, 1.0 / 60.0, &[0.0, 0.5], &cfg).unwrap();
    for (a, b) in p.values.iter().zip(&one.values) {
        assert!((a - c * c * b).abs() <= 1e-12 * a.abs());
    }
    let centered = semiclassical_profile(&m, &o, E_MID, 1.0 / 60.0, &[0.0, 0.5], &PredictorConfig { center: true, ..cfg }).unwrap();
    assert!(centered.values.iter().all(|v| v.abs() < 1e-12 * p.values[0]));
}

#[test]
fn offdiag_is_symmetric_in_the_energies() {
    let m = lmg();
    let o = lmg::observable_symbol();
    let hbar = 1.0 / 60.0;
    for mode in [PredictorMode::TangentLine, PredictorMode::Direct] {
        let cfg = PredictorConfig {
            mode,
            domain: ADomain::Box(BoxRule::EqualArea),
            n_zb: 4,
            direct_angles: 48,
            ..Default::default()
        };
        let a = semiclassical_offdiag(&m, &o, E_MID + 0.2, E_MID - 0.2, hbar, &cfg).unwrap();
        let b = semiclassical_offdiag(&m, &o, E_MID - 0.2, E_MID + 0.2, hbar, &cfg).unwrap();
        assert!((a.value - b.value).abs() <= 1e-9 * a.value.abs(), "{mode:?}: {a:?} {b:?}");
    }
}

#[test]
fn tangent_line_agrees_with_direct_pairing() {
    let m = lmg();
    let o = lmg::observable_symbol();
    let omegas = [0.3, 0.6, 1.0];
    let base = PredictorConfig { domain: ADomain::Box(BoxRule::EqualArea), n_zb: 16, direct_angles: 128, ..Default::default() };
    let t = semiclassical_profile(&m, &o, E_MID, 1.0 / 60.0, &omegas, &base).unwrap();
    let d = semiclassical_profile(&m, &o, E_MID, 1.0 / 60.0, &omegas, &PredictorConfig { mode: PredictorMode::Direct, ..base })
        .unwrap();
    for k in 0..omegas.len() {
        let rel = (t.values[k] / d.values[k] - 1.0).abs();
        assert!(rel < 0.15, "ω={}: tangent {} direct {}", omegas[k], t.values[k], d.values[k]);
    }
}

#[test]
fn profile_is_even_and_peaks_at_zero() {
    let m = lmg();
    let omegas: Vec<f64> = (-12..=12).map(|k| k as f64 * 0.1).collect();
    let p = semiclassical_profile(&m, &lmg::observable_symbol(), E_MID, 1.0 / 60.0, &omegas, &PredictorConfig::default())
        .unwrap();
    for k in 0..omegas.len() {
        let mirror = p.values[omegas.len() - 1 - k];
        assert!((p.values[k] - mirror).abs() <= 1e-10 * p.values[12]);
    }
    assert!(p.values.iter().all(|&v| v <= p.values[12]));
    assert!(p.half_width(0.5).unwrap() > 0.0);
    let mut buf = Vec::new();
    write_semiclassical_csv(&mut buf, &p).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("omega,value,stderr"));
    assert_eq!(text.lines().count(), omegas.len() + 1);
}

fn quick_bandwidth(seed: u64) -> BandwidthConfig {
    BandwidthConfig { n_samples: 4000, n_width_points: 16, seed, ..Default::default() }
}

#[test]
fn bandwidth_is_exactly_linear_in_hbar() {
    let m = lmg();
    let o = lmg::observable_symbol();
    let cfg = quick_bandwidth(3);
    let a = bandwidth_estimate(&m, &o, E_MID, 1.0 / 60.0, 0.5, &cfg).unwrap();
    let b = bandwidth_estimate(&m, &o, E_MID, 1.0 / 120.0, 0.5, &cfg).unwrap();
    assert!((a.w_b.value / b.w_b.value - 2.0).abs() < 1e-12);
    assert_eq!(a.restrict, Restrict::SubsystemA);
}

/// At fixed `e` the shell moves inward in A as `a` grows, so the width factor
/// is not frozen: the estimate factorizes exactly into gradient and width
/// ratios, the gradient ratio grows with `a`, and the width drift is reported.
#[test]
fn bandwidth_factorizes_under_a_scan() {
    let o = lmg::observable_symbol();
    let cfg = BandwidthConfig { n_width_points: 32, ..quick_bandwidth(8) };
    let est = |a: f64| {
        bandwidth_estimate(&LmgModel(LmgParams::default().with_omega(60).with_a(a)), &o, E_MID, 1.0 / 60.0, 0.5, &cfg)
            .unwrap()
    };
    let one = est(1.0);
    for a in [0.6, 1.4] {
        let x = est(a);
        let wr = x.w_b.value / one.w_b.value;
        let gr = x.grad_norm.value / one.grad_norm.value;
        let dr = x.width.value / one.width.value;
        assert!((wr - gr * dr).abs() < 1e-12 * wr);
        assert_eq!(gr > 1.0, a > 1.0);
        let tau = thermalization_time(x.w_b.value, x.hbar).unwrap();
        assert!((tau * x.w_b.value - x.hbar).abs() < 1e-15);
        eprintln!("a={a}: w_b ratio {wr:.3}, gradient ratio {gr:.3}, width ratio {dr:.3}");
    }
}
