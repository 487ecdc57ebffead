use std::io::{self, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::curves::{level_curve, CurveConfig, CurvePoint};
use super::{BoxRule, Estimate, SplitModel};
use crate::error::{Error, Result};
use crate::jfunc::{fourier_moment, Bound, ConvolutionIntegrand, Domain, JTilde};
use crate::par;
use crate::weylcalc::{classical_limit, Monomial, PhasePolynomial};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// How the pair of level curves is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PredictorMode {
    /// Pair each point of `C(e)` with the straight normal line through it.
    /// The tangential integral then collapses to a one-dimensional Fourier
    /// transform of `Φ` along the tangent, evaluated exactly.
    #[default]
    TangentLine,
    /// Double sum over nodes of `C(E_i)` and `C(E_j)` with `J_A` evaluated
    /// at every pair. Needs a box rule.
    Direct,
}

/// Which region bounds the shifts of the Wigner-function product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ADomain {
    /// The admissible A-disk itself.
    #[default]
    Disk,
    Box(BoxRule),
}

/// Outer `z_B` integration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZbSampling {
    /// Independent uniform draws over the B-disk.
    MonteCarlo,
    /// One jittered draw per equal-area polar cell.
    #[default]
    Stratified,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictorConfig {
    pub mode: PredictorMode,
    pub domain: ADomain,
    pub zb_sampling: ZbSampling,
    pub n_zb: usize,
    pub curve: CurveConfig,
    /// Curve nodes per level in direct mode.
    pub direct_angles: usize,
    /// Use the classical symbol instead of the full Weyl symbol.
    pub classical_symbol: bool,
    /// Subtract the shell mean of the symbol first. Off-diagonal quantum
    /// elements do not change under `O → O − c`.
    pub center: bool,
    pub seed: u64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig {
            mode: PredictorMode::TangentLine,
            domain: ADomain::Disk,
            zb_sampling: ZbSampling::Stratified,
            n_zb: 256,
            curve: CurveConfig::default(),
            direct_angles: 256,
            classical_symbol: false,
            center: false,
            seed: 0,
        }
    }
}

/// Predicted shell average of `|O_ij|²` against `ω = E_i − E_j`.
#[derive(Clone, Debug, Serialize)]
pub struct SemiclassicalProfile {
    pub energy: f64,
    pub hbar: f64,
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `∫P dω`. Finite even when A is unbounded.
    pub weight: Estimate,
    /// `S(e) = ∫dz_B ∮dℓ/|∇_A H|`.
    pub surface: Estimate,
    /// The constant removed from the symbol (zero without centering).
    pub offset: f64,
    pub n_zb: usize,
    /// `z_B` draws whose level curve was empty.
    pub empty_zb: usize,
}

impl SemiclassicalProfile {
    /// Density of states `S(e)/(2πħ)^2` implied by the curve quadrature.
    pub fn density_of_states(&self) -> f64 {
        self.surface.value / (TWO_PI * self.hbar).powi(2)
    }

    /// Half-width at `ε·max`: the outermost threshold crossing on each side of
    /// the maximum, linearly interpolated and averaged.
    pub fn half_width(&self, epsilon: f64) -> Result<f64> {
        let n = self.values.len();
        if n < 3 {
            return Err(Error::EmptyProfile);
        }
        let (pk, peak) = self.values.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (k, &v)| if v > a.1 { (k, v) } else { a });
        if pk == 0 || pk == n - 1 || !(peak > 0.0) {
            return Err(Error::InvalidArgument("predicted peak is not interior".into()));
        }
        let thr = epsilon * peak;
        let side = |idx: Vec<usize>| -> f64 {
            let last = idx.iter().rposition(|&k| self.values[k] >= thr).unwrap_or(0);
            let k0 = idx[last];
            match idx.get(last + 1) {
                Some(&k1) => {
                    let (w0, v0, w1, v1) = (self.omegas[k0], self.values[k0], self.omegas[k1], self.values[k1]);
                    (w0 + (thr - v0) / (v1 - v0) * (w1 - w0) - self.omegas[pk]).abs()
                }
                None => (self.omegas[k0] - self.omegas[pk]).abs(),
            }
        };
        Ok(0.5 * (side((pk..n).collect()) + side((0..=pk).rev().collect())))
    }
}

/// The symbol restricted to mode 1 as a one-mode polynomial, with ħ
/// substituted (or dropped for the classical symbol).
fn subsystem_symbol(o: &PhasePolynomial, hbar: f64, classical: bool) -> Result<PhasePolynomial> {
    let o = if classical { classical_limit(o).0 } else { o.at_hbar(hbar) };
    let terms: Result<Vec<_>> = o
        .terms()
        .map(|(m, c)| {
            if m.p.iter().skip(1).chain(m.q.iter().skip(1)).any(|&e| e > 0) {
                return Err(Error::InvalidArgument("observable must act on subsystem A (mode 1) only".into()));
            }
            Ok((Monomial { p: vec![m.p[0]], q: vec![m.q[0]], hbar: 0 }, *c))
        })
        .collect();
    Ok(PhasePolynomial::from_terms(1, terms?))
}

/// Coefficients in `v` of `O(p + αv, q + βv)`.
fn along_line(o: &PhasePolynomial, p: f64, q: f64, alpha: f64, beta: f64) -> Vec<Complex64> {
    let deg = o.degree() as usize;
    let mut out = vec![Complex64::default(); deg + 1];
    for (m, c) in o.terms() {
        let (a, b) = (m.p[0] as usize, m.q[0] as usize);
        let pa = binomial_expand(p, alpha, a);
        let qb = binomial_expand(q, beta, b);
        for (i, x) in pa.iter().enumerate() {
            for (j, y) in qb.iter().enumerate() {
                out[i + j] += c * x * y;
            }
        }
    }
    out
}

/// Coefficients of `(x + s v)^n`.
fn binomial_expand(x: f64, s: f64, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n + 1];
    let mut binom = 1.0;
    for k in 0..=n {
        c[k] = binom * x.powi((n - k) as i32) * s.powi(k as i32);
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    c
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Half-length `L` of the tangent segment `z_A ± (v/2)m`, `|v| ≤ L`, that
/// keeps both endpoints inside the region. `None` when A is unbounded.
fn segment_half_length(domain: ADomain, za: [f64; 2], m: [f64; 2], r_a: Option<f64>) -> Option<f64> {
    let r = r_a?;
    Some(match domain {
        ADomain::Disk => {
            let zm = (za[0] * m[0] + za[1] * m[1]).abs();
            let z2 = za[0] * za[0] + za[1] * za[1];
            (2.0 * (-zm + (zm * zm + r * r - z2).max(0.0).sqrt())).max(0.0)
        }
        ADomain::Box(rule) => {
            let s = rule.half_side(r);
            let mut l = f64::INFINITY;
            for k in 0..2 {
                let room = s - za[k].abs();
                if room < 0.0 {
                    return Some(0.0);
                }
                if m[k] != 0.0 {
                    l = l.min(2.0 * room / m[k].abs());
                }
            }
            l
        }
    })
}

fn zb_draws(cfg: &PredictorConfig, r_b: f64) -> Vec<[f64; 2]> {
    let n = cfg.n_zb;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let u = Uniform::new(0.0, 1.0).expect("valid range");
    let polar = |a: f64, b: f64| {
        let r = r_b * a.sqrt();
        let phi = TWO_PI * b;
        [r * phi.cos(), r * phi.sin()]
    };
    match cfg.zb_sampling {
        ZbSampling::MonteCarlo => (0..n).map(|_| polar(u.sample(&mut rng), u.sample(&mut rng))).collect(),
        ZbSampling::Stratified => {
            let nr = ((n as f64).sqrt().round() as usize).max(1);
            let nphi = n.div_ceil(nr);
            let mut out = Vec::with_capacity(nr * nphi);
            for i in 0..nr {
                for j in 0..nphi {
                    let a = (i as f64 + u.sample(&mut rng)) / nr as f64;
                    let b = (j as f64 + u.sample(&mut rng)) / nphi as f64;
                    out.push(polar(a, b));
                }
            }
            out
        }
    }
}

/// Per-`z_B` sums entering the ratio estimators.
struct ZbTerm {
    /// `∮ dℓ/|∇_A H|`.
    surface: f64,
    /// `∮ dℓ/|∇_A H| · Φ(0)`.
    weight: f64,
    /// `∮ dℓ/|∇_A H|² · Re∫dv Φ(v) e^{ivω/(ħ|∇_A H|)}` per ω (tangent
    /// mode), or the raw double curve sum of `J_A` (direct mode).
    profile: Vec<f64>,
    /// Direct mode: `(∮_{C_i}, ∮_{C_j})` of `dℓ/|∇_A H|` per ω.
    pair_surfaces: Vec<(f64, f64)>,
}

fn tangent_term(
    o: &PhasePolynomial,
    pts: &[CurvePoint],
    omegas: &[f64],
    hbar: f64,
    domain: ADomain,
    r_a: Option<f64>,
) -> Result<ZbTerm> {
    let mut t = ZbTerm { surface: 0.0, weight: 0.0, profile: vec![0.0; omegas.len()], pair_surfaces: Vec::new() };
    for cp in pts {
        let (p, q) = (cp.z[0], cp.z[2]);
        let g = cp.grad_a[0].hypot(cp.grad_a[1]);
        let n = [cp.grad_a[0] / g, cp.grad_a[1] / g];
        // Tangent m = (n_q, −n_p); the shifts are p̃ = v n_q, q̃ = v n_p.
        let m = [n[1], -n[0]];
        let plus = along_line(o, p, q, 0.5 * m[0], 0.5 * m[1]);
        let minus = along_line(o, p, q, -0.5 * m[0], -0.5 * m[1]);
        let phi = poly_mul(&plus, &minus);
        t.surface += cp.weight;
        t.weight += cp.weight * phi[0].re;
        match segment_half_length(domain, [p, q], m, r_a) {
            Some(l) => {
                for (k, &w) in omegas.iter().enumerate() {
                    let kappa = w / (hbar * g);
                    let mut acc = 0.0;
                    for (j, c) in phi.iter().enumerate() {
                        if *c != Complex64::default() {
                            acc += (c * fourier_moment(j as u32, -kappa, l)).re;
                        }
                    }
                    t.profile[k] += cp.weight / g * acc;
                }
            }
            None => t.profile.iter_mut().for_each(|x| *x = f64::NAN),
        }
    }
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
fn direct_term<M: SplitModel + ?Sized>(
    model: &M,
    o: &PhasePolynomial,
    phi: &ConvolutionIntegrand,
    zb: [f64; 2],
    e: f64,
    omegas: &[f64],
    hbar: f64,
    rule: BoxRule,
    cfg: &PredictorConfig,
) -> Result<ZbTerm> {
    let r_a = model
        .a_radius(zb)
        .ok_or_else(|| Error::InvalidArgument("direct mode needs a bounded subsystem A".into()))?;
    let s = rule.half_side(r_a);
    let domain = Domain { p: vec![Bound::Interval(-s, s)], q: vec![Bound::Interval(-s, s)] };
    let ccfg = CurveConfig { angles: cfg.direct_angles, ..cfg.curve };
    let c0 = level_curve(model, zb, e, &cfg.curve)?;
    let mut t = tangent_term(o, &c0, &[], hbar, ADomain::Box(rule), Some(r_a))?;
    for &w in omegas {
        let ci = level_curve(model, zb, e + 0.5 * w, &ccfg)?;
        let cj = level_curve(model, zb, e - 0.5 * w, &ccfg)?;
        let si: f64 = ci.iter().map(|c| c.weight).sum();
        let sj: f64 = cj.iter().map(|c| c.weight).sum();
        let mut acc = 0.0;
        for a in &ci {
            for b in &cj {
                let mid = [0.5 * (a.z[0] + b.z[0]), 0.5 * (a.z[2] + b.z[2])];
                if mid[0].abs() >= s || mid[1].abs() >= s {
                    continue;
                }
                let jt = JTilde::with_integrand(phi, &mid, domain.clone())?;
                let x = [(a.z[0] - b.z[0]) / hbar, (a.z[2] - b.z[2]) / hbar];
                acc += a.weight * b.weight * jt.eval(&x)? / (TWO_PI * hbar);
            }
        }
        t.profile.push(acc);
        t.pair_surfaces.push((si, sj));
    }
    Ok(t)
}

fn centered(o: &PhasePolynomial, offset: f64) -> PhasePolynomial {
    &o.clone() - &PhasePolynomial::constant(1, Complex64::new(offset, 0.0))
}

/// Shell mean `⟨O⟩_e` from the same curve quadrature.
fn shell_mean(terms: &[(f64, f64)]) -> f64 {
    let s: f64 = terms.iter().map(|t| t.0).sum();
    let w: f64 = terms.iter().map(|t| t.1).sum();
    if s > 0.0 {
        w / s
    } else {
        0.0
    }
}

/// Predicted shell-averaged `|O_ij|²` at energy `e` for each `ω = E_i − E_j`:
///
/// `P(ω) = (2πħ)/S(e)² ∫dz_B ∮_{C(e,z_B)} dℓ/|∇_A H| ⟨J_A⟩`,
///
/// with `S(e) = ∫dz_B ∮dℓ/|∇_A H|`, the curves `C` in the `(p_1, q_1)` plane
/// and `J_A` paired across the two energy surfaces. `o` is a Weyl symbol
/// (one or two modes) that may only involve mode 1.
pub fn semiclassical_profile<M: SplitModel + ?Sized>(
    model: &M,
    o: &PhasePolynomial,
    e: f64,
    hbar: f64,
    omegas: &[f64],
    cfg: &PredictorConfig,
) -> Result<SemiclassicalProfile> {
    if !(hbar > 0.0) || cfg.n_zb == 0 || cfg.curve.angles == 0 {
        return Err(Error::InvalidArgument("need ħ > 0 and non-empty quadratures".into()));
    }
    let o1 = subsystem_symbol(o, hbar, cfg.classical_symbol)?;
    let draws = zb_draws(cfg, model.b_radius());
    let curves: Vec<Result<Vec<CurvePoint>>> = par::map_slice(&draws, |zb| level_curve(model, *zb, e, &cfg.curve));
    let curves: Vec<Vec<CurvePoint>> = curves.into_iter().collect::<Result<_>>()?;
    let empty_zb = curves.iter().filter(|c| c.is_empty()).count();
    if empty_zb == curves.len() {
        return Err(Error::ZeroAcceptance(0.0));
    }
    let offset = if cfg.center {
        let sums: Vec<(f64, f64)> = curves
            .iter()
            .map(|c| {
                let s = c.iter().map(|p| p.weight).sum();
                let w = c.iter().map(|p| p.weight * o1.evaluate(&[p.z[0], p.z[2]], 0.0).map(|v| v.re).unwrap_or(0.0)).sum();
                (s, w)
            })
            .collect();
        shell_mean(&sums)
    } else {
        0.0
    };
    let o1 = centered(&o1, offset);
    let idx: Vec<usize> = (0..draws.len()).collect();
    let terms: Vec<Result<ZbTerm>> = match (cfg.mode, cfg.domain) {
        (PredictorMode::TangentLine, dom) => {
            par::map_slice(&idx, |&k| tangent_term(&o1, &curves[k], omegas, hbar, dom, model.a_radius(draws[k])))
        }
        (PredictorMode::Direct, ADomain::Box(rule)) => {
            let phi = ConvolutionIntegrand::new(&o1)?;
            par::map_slice(&idx, |&k| direct_term(model, &o1, &phi, draws[k], e, omegas, hbar, rule, cfg))
        }
        (PredictorMode::Direct, ADomain::Disk) => {
            return Err(Error::InvalidArgument("direct mode needs a box rule for the A-domain".into()))
        }
    };
    let terms: Vec<ZbTerm> = terms.into_iter().collect::<Result<_>>()?;
    let area = std::f64::consts::PI * model.b_radius().powi(2);
    let n = terms.len() as f64;
    let ys: Vec<f64> = terms.iter().map(|t| area * t.surface).collect();
    let surface = mean_se(&ys);
    let pref = TWO_PI * hbar;
    let ratio = |xs: &[f64], factor: f64| -> Estimate {
        // X̄/Ȳ² with the delta-method standard error.
        let xbar = xs.iter().sum::<f64>() / n;
        let ybar = surface.value;
        let val = factor * xbar / (ybar * ybar);
        let infl: Vec<f64> =
            xs.iter().zip(&ys).map(|(x, y)| factor * (x / (ybar * ybar) - 2.0 * xbar * y / ybar.powi(3))).collect();
        Estimate { value: val, stderr: mean_se(&infl).stderr }
    };
    let wx: Vec<f64> = terms.iter().map(|t| area * t.weight).collect();
    let weight = ratio(&wx, pref * TWO_PI * hbar);
    let mut values = Vec::with_capacity(omegas.len());
    let mut stderr = Vec::with_capacity(omegas.len());
    for k in 0..omegas.len() {
        let xs: Vec<f64> = terms.iter().map(|t| area * t.profile[k]).collect();
        let est = match cfg.mode {
            PredictorMode::TangentLine => ratio(&xs, pref),
            PredictorMode::Direct => {
                // X̄/(Ȳ_i Ȳ_j); the spread of the surfaces is left out of the error.
                let yi = area * terms.iter().map(|t| t.pair_surfaces[k].0).sum::<f64>() / n;
                let yj = area * terms.iter().map(|t| t.pair_surfaces[k].1).sum::<f64>() / n;
                let x = mean_se(&xs);
                Estimate { value: pref * x.value / (yi * yj), stderr: pref * x.stderr / (yi * yj) }
            }
        };
        values.push(est.value);
        stderr.push(est.stderr);
    }
    Ok(SemiclassicalProfile {
        energy: e,
        hbar,
        omegas: omegas.to_vec(),
        values,
        stderr,
        weight,
        surface,
        offset,
        n_zb: draws.len(),
        empty_zb,
    })
}

fn mean_se(xs: &[f64]) -> Estimate {
    super::shell::mean_and_stderr(xs)
}

/// Predicted `⟨|O_ij|²⟩` for one pair of energies.
pub fn semiclassical_offdiag<M: SplitModel + ?Sized>(
    model: &M,
    o: &PhasePolynomial,
    e_i: f64,
    e_j: f64,
    hbar: f64,
    cfg: &PredictorConfig,
) -> Result<Estimate> {
    let p = semiclassical_profile(model, o, 0.5 * (e_i + e_j), hbar, &[e_i - e_j], cfg)?;
    Ok(Estimate { value: p.values[0], stderr: p.stderr[0] })
}

/// `omega,value,stderr` rows.
pub fn write_semiclassical_csv<W: Write>(mut w: W, p: &SemiclassicalProfile) -> io::Result<()> {
    writeln!(w, "omega,value,stderr")?;
    for ((o, v), s) in p.omegas.iter().zip(&p.values).zip(&p.stderr) {
        writeln!(w, "{o:.10e},{v:.10e},{s:.10e}")?;
    }
    Ok(())
}
