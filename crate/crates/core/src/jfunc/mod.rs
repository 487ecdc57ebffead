//! The bilinear phase-space convolution `J` and its ħ-free form
//!
//! ```text
//! J̃(p,q; X₁,X₂) = ∫dp̃ dq̃ e^{−iq̃·X₁} e^{−ip̃·X₂} O(p+p̃/2, q−q̃/2) O(p−p̃/2, q+q̃/2),
//! ```
//!
//! with `J(p,q; p',q') ≈ (2πħ)^{-d} J̃(p,q; p'/ħ, q'/ħ)`. Arguments are laid out
//! as `X' = (X₁, X₂)`, each block of length `d`.

mod analytic;
mod moments;
mod region;

pub use analytic::{j_analytic, j_analytic_limit, AxisFactor, JDistribution, JKind, SeparableTerm};
pub use moments::{fourier_moment, fourier_moments, gaussian_moments};
pub use region::{
    mean_width, region_width, write_jprofile_csv, GaussianKernel, JEvaluation, Kernel, Region, RegionOptions,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::weylcalc::{Monomial, PhasePolynomial};

/// Admissible range of one phase-space coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Interval(f64, f64),
    Unbounded,
}

impl Bound {
    /// Largest `|t|` with `x ± t/2` inside the bound, or `None` if unbounded.
    /// Negative when `x` itself lies outside.
    fn shift_half_length(&self, x: f64) -> Option<f64> {
        match *self {
            Bound::Interval(lo, hi) => Some(2.0 * (hi - x).min(x - lo)),
            Bound::Unbounded => None,
        }
    }
}

/// Per-coordinate support of the observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub p: Vec<Bound>,
    pub q: Vec<Bound>,
}

impl Domain {
    /// `[−b, b]^{2d}`.
    pub fn cube(dim: usize, b: f64) -> Self {
        Domain { p: vec![Bound::Interval(-b, b); dim], q: vec![Bound::Interval(-b, b); dim] }
    }

    pub fn unbounded(dim: usize) -> Self {
        Domain { p: vec![Bound::Unbounded; dim], q: vec![Bound::Unbounded; dim] }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }
}

/// `O(p + s_p p̃, q + s_q q̃)` as a polynomial in `2d` modes: the first `d`
/// carry `(p, q)`, the last `d` carry `(p̃, q̃)`.
fn shifted(o: &PhasePolynomial, sp: f64, sq: f64) -> PhasePolynomial {
    let d = o.dim();
    let lin = |mu: usize, momentum: bool, s: f64| {
        let (a, b) = if momentum {
            (PhasePolynomial::p(2 * d, mu + 1), PhasePolynomial::p(2 * d, d + mu + 1))
        } else {
            (PhasePolynomial::q(2 * d, mu + 1), PhasePolynomial::q(2 * d, d + mu + 1))
        };
        &a + &b.scale(Complex64::new(s, 0.0))
    };
    let mut out = PhasePolynomial::zero(2 * d);
    for (m, c) in o.terms() {
        let mut t = PhasePolynomial::constant(2 * d, *c);
        for mu in 0..d {
            for _ in 0..m.p[mu] {
                t = &t * &lin(mu, true, sp);
            }
            for _ in 0..m.q[mu] {
                t = &t * &lin(mu, false, sq);
            }
        }
        out = &out + &t;
    }
    out
}

/// The integrand `Φ(p̃,q̃) = O(p+p̃/2, q−q̃/2)·O(p−p̃/2, q+q̃/2)` kept symbolic in
/// the base point.
#[derive(Clone, Debug)]
pub struct ConvolutionIntegrand {
    dim: usize,
    full: PhasePolynomial,
}

impl ConvolutionIntegrand {
    /// `o` must be classical (no ħ powers); substitute ħ first with `at_hbar`.
    pub fn new(o: &PhasePolynomial) -> Result<Self> {
        if o.terms().any(|(m, _)| m.hbar > 0) {
            return Err(Error::InvalidArgument("symbol still carries powers of ħ".into()));
        }
        let full = &shifted(o, 0.5, -0.5) * &shifted(o, -0.5, 0.5);
        Ok(ConvolutionIntegrand { dim: o.dim(), full })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Polynomial in all `2d` modes: base `(p,q)` then shifts `(p̃,q̃)`.
    pub fn symbolic(&self) -> &PhasePolynomial {
        &self.full
    }

    /// Fix the base point `z = (p.., q..)`, leaving a polynomial in `(p̃, q̃)`.
    pub fn at(&self, z: &[f64]) -> Result<PhasePolynomial> {
        let d = self.dim;
        if z.len() != 2 * d {
            return Err(Error::DimensionMismatch { expected: 2 * d, found: z.len() });
        }
        let terms = self.full.terms().map(|(m, c)| {
            let mut v = *c;
            for mu in 0..d {
                v *= z[mu].powi(m.p[mu] as i32) * z[d + mu].powi(m.q[mu] as i32);
            }
            let mono = Monomial { p: m.p[d..].to_vec(), q: m.q[d..].to_vec(), hbar: 0 };
            (mono, v)
        });
        Ok(PhasePolynomial::from_terms(d, terms.collect::<Vec<_>>()))
    }
}

/// `J̃` at a fixed base point for a classical polynomial observable.
#[derive(Clone, Debug)]
pub struct JTilde {
    base: Vec<f64>,
    domain: Domain,
    phi: PhasePolynomial,
    /// Half-lengths of the `p̃_μ` and `q̃_μ` integration ranges.
    len_p: Vec<Option<f64>>,
    len_q: Vec<Option<f64>>,
}

impl JTilde {
    pub fn new(o_cl: &PhasePolynomial, base: &[f64], domain: Domain) -> Result<Self> {
        Self::with_integrand(&ConvolutionIntegrand::new(o_cl)?, base, domain)
    }

    /// Reuse a prepared integrand across many base points.
    pub fn with_integrand(phi: &ConvolutionIntegrand, base: &[f64], domain: Domain) -> Result<Self> {
        let d = phi.dim();
        if domain.dim() != d || domain.q.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: domain.dim() });
        }
        let poly = phi.at(base)?;
        let len_p = (0..d).map(|mu| domain.p[mu].shift_half_length(base[mu])).collect();
        let len_q = (0..d).map(|mu| domain.q[mu].shift_half_length(base[d + mu])).collect();
        Ok(JTilde { base: base.to_vec(), domain, phi: poly, len_p, len_q })
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `Φ` as a polynomial in `(p̃, q̃)`.
    pub fn integrand(&self) -> &PhasePolynomial {
        &self.phi
    }

    /// Half-lengths of the `(p̃, q̃)` ranges; `None` marks an unbounded axis.
    pub fn half_lengths(&self) -> (&[Option<f64>], &[Option<f64>]) {
        (&self.len_p, &self.len_q)
    }

    /// True when the base point lies inside the domain box.
    pub fn is_inside(&self) -> bool {
        self.len_p.iter().chain(&self.len_q).all(|l| l.is_none_or(|l| l > 0.0))
    }

    fn bounded_lengths(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let take = |v: &[Option<f64>]| -> Result<Vec<f64>> {
            v.iter()
                .map(|l| {
                    l.map(|l| l.max(0.0)).ok_or_else(|| {
                        Error::Domain("unbounded axis: J̃ is distributional, use the analytic evaluators".into())
                    })
                })
                .collect()
        };
        Ok((take(&self.len_p)?, take(&self.len_q)?))
    }

    /// Complex value at `X' = (X₁, X₂)`.
    pub fn eval_complex(&self, x: &[f64]) -> Result<Complex64> {
        let d = self.dim();
        if x.len() != 2 * d {
            return Err(Error::DimensionMismatch { expected: 2 * d, found: x.len() });
        }
        let (lp, lq) = self.bounded_lengths()?;
        let mut deg_p = vec![0u32; d];
        let mut deg_q = vec![0u32; d];
        for (m, _) in self.phi.terms() {
            for mu in 0..d {
                deg_p[mu] = deg_p[mu].max(m.p[mu]);
                deg_q[mu] = deg_q[mu].max(m.q[mu]);
            }
        }
        // p̃_μ pairs with X₂_μ, q̃_μ with X₁_μ.
        let mp: Vec<_> = (0..d).map(|mu| fourier_moments(deg_p[mu], x[d + mu], lp[mu])).collect();
        let mq: Vec<_> = (0..d).map(|mu| fourier_moments(deg_q[mu], x[mu], lq[mu])).collect();
        let mut acc = Complex64::default();
        for (m, c) in self.phi.terms() {
            let mut t = *c;
            for mu in 0..d {
                t *= mp[mu][m.p[mu] as usize] * mq[mu][m.q[mu] as usize];
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Real part of [`eval_complex`](Self::eval_complex); the imaginary part
    /// vanishes for real symbols.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_complex(x)?.re)
    }

    /// `∫ J(p',q') φ(p',q') dp'dq'` with `J = (2πħ)^{-d} J̃(p'/ħ, q'/ħ)` and the
    /// unnormalized Gaussian `φ = exp(−|(p',q')|²/(2s²))`. Unbounded axes are
    /// integrated exactly over the real line.
    pub fn pair_gaussian(&self, hbar: f64, s: f64) -> Result<f64> {
        if hbar <= 0.0 || s <= 0.0 {
            return Err(Error::InvalidArgument("ħ and test width must be positive".into()));
        }
        let d = self.dim();
        // ∫J φ = (2πħ)^{-d} ∫dY Φ(Y) Π s√(2π) exp(−Y²s²/(2ħ²))
        let sigma = hbar / s;
        let mut deg_p = vec![0u32; d];
        let mut deg_q = vec![0u32; d];
        for (m, _) in self.phi.terms() {
            for mu in 0..d {
                deg_p[mu] = deg_p[mu].max(m.p[mu]);
                deg_q[mu] = deg_q[mu].max(m.q[mu]);
            }
        }
        let clamp = |l: Option<f64>| l.map(|l| l.max(0.0));
        let gp: Vec<_> = (0..d).map(|mu| gaussian_moments(deg_p[mu], sigma, clamp(self.len_p[mu]))).collect();
        let gq: Vec<_> = (0..d).map(|mu| gaussian_moments(deg_q[mu], sigma, clamp(self.len_q[mu]))).collect();
        let mut acc = 0.0;
        for (m, c) in self.phi.terms() {
            let mut t = c.re;
            for mu in 0..d {
                t *= gp[mu][m.p[mu] as usize] * gq[mu][m.q[mu] as usize];
            }
            acc += t;
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let axis = s * two_pi.sqrt();
        Ok(acc * axis.powi(2 * d as i32) / (two_pi * hbar).powi(d as i32))
    }
}

impl Kernel for JTilde {
    fn arity(&self) -> usize {
        2 * self.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x).unwrap_or(f64::NAN)
    }

    fn scale(&self) -> f64 {
        let l = self
            .len_p
            .iter()
            .chain(&self.len_q)
            .filter_map(|l| *l)
            .fold(0.0f64, f64::max);
        if l > 0.0 {
            std::f64::consts::PI / l
        } else {
            1.0
        }
    }
}

/// `J(p,q; p',q') = (2πħ)^{-d} J̃(p,q; p'/ħ, q'/ħ)` at `z' = (p'.., q'..)`.
pub fn j_from_tilde(jt: &JTilde, z_prime: &[f64], hbar: f64) -> Result<f64> {
    let d = jt.dim();
    if z_prime.len() != 2 * d {
        return Err(Error::DimensionMismatch { expected: 2 * d, found: z_prime.len() });
    }
    let x: Vec<f64> = z_prime.iter().map(|v| v / hbar).collect();
    Ok(jt.eval(&x)? / (2.0 * std::f64::consts::PI * hbar).powi(d as i32))
}

/// Convenience wrapper for [`JTilde::eval`].
pub fn jtilde_eval(jt: &JTilde, x: &[f64]) -> Result<f64> {
    jt.eval(x)
}
