//! Closed-form `J` for three reference observables, as sums of separable
//! terms whose axis factors are regular functions or derivatives of δ.
//!
//! * `Q1Unbounded`: `O = q₁` on unbounded phase space.
//! * `P1Box`: `O = p₁` on the box `[−1,1]^{2d}`.
//! * `PqBox`: `O = p·q` on the same box. The `μ ≠ ν` cross terms are
//!   marked experimental.
//!
//! With `g(x) = 1 − |x|`, `u = 2g(b)a/ħ` and
//! `F(a,b) = (1/πa){g cos u − (ħ/2a + ib) sin u}`.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JKind {
    Q1Unbounded,
    P1Box,
    PqBox,
}

/// One-variable factor of a separable term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AxisFactor {
    /// `δ^{(k)}(x)`.
    Delta(u32),
    /// `sin(2g x/ħ)/(πx)`.
    Sinc { g: f64 },
    /// `(1/πx)([(2|b|−1) + ħ²/2x²] sin u − (ħ/x) g cos u)`, `g = g(b)`.
    Edge { b: f64 },
    /// Real or imaginary part of `F(x, b)`, or of its conjugate.
    F { b: f64, imag: bool, conj: bool },
}

fn g_of(x: f64) -> f64 {
    1.0 - x.abs()
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// `(sin u − u cos u)/u³`.
fn edge_kernel(u: f64) -> f64 {
    if u.abs() < 0.1 {
        let u2 = u * u;
        1.0 / 3.0 - u2 / 30.0 + u2 * u2 / 840.0 - u2 * u2 * u2 / 45360.0
    } else {
        (u.sin() - u * u.cos()) / (u * u * u)
    }
}

impl AxisFactor {
    /// Pointwise value, `None` for δ factors.
    pub fn value(&self, x: f64, hbar: f64) -> Option<f64> {
        match *self {
            AxisFactor::Delta(_) => None,
            AxisFactor::Sinc { g } => Some(2.0 * g / (PI * hbar) * sinc(2.0 * g * x / hbar)),
            AxisFactor::Edge { b } => {
                let g = g_of(b);
                let u = 2.0 * g * x / hbar;
                Some(2.0 * g / (PI * hbar) * ((2.0 * b.abs() - 1.0) * sinc(u) + 2.0 * g * g * edge_kernel(u)))
            }
            AxisFactor::F { b, imag, conj } => {
                let g = g_of(b);
                let u = 2.0 * g * x / hbar;
                let pre = 2.0 * g / (PI * hbar);
                Some(if imag {
                    let v = -pre * b * sinc(u);
                    if conj {
                        -v
                    } else {
                        v
                    }
                } else {
                    -pre * g * u * edge_kernel(u)
                })
            }
        }
    }

    /// Characteristic angular frequency in `x`, for quadrature sizing.
    fn frequency(&self, hbar: f64) -> f64 {
        match *self {
            AxisFactor::Delta(_) => 0.0,
            AxisFactor::Sinc { g } => 2.0 * g / hbar,
            AxisFactor::Edge { b } | AxisFactor::F { b, .. } => 2.0 * g_of(b) / hbar,
        }
    }

    /// `∫ f(x) exp(−x²/(2s²)) dx`.
    pub fn pair_gaussian(&self, hbar: f64, s: f64) -> f64 {
        match *self {
            AxisFactor::Delta(k) => gaussian_derivative_at_zero(k, s),
            _ => {
                let reach = 9.0 * s;
                let periods = 2.0 * reach * self.frequency(hbar) / (2.0 * PI);
                let panels = (2.0 * periods).ceil().max(32.0) as usize;
                let rule = GaussLegendre::new(20.try_into().unwrap());
                let h = 2.0 * reach / panels as f64;
                (0..panels)
                    .map(|i| {
                        let a = -reach + i as f64 * h;
                        rule.integrate(a, a + h, |x| {
                            self.value(x, hbar).unwrap() * (-x * x / (2.0 * s * s)).exp()
                        })
                    })
                    .sum()
            }
        }
    }
}

/// `⟨δ^{(k)}, φ⟩ = (−1)^k φ^{(k)}(0)` for `φ = exp(−x²/(2s²))`.
fn gaussian_derivative_at_zero(k: u32, s: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let double_fact: f64 = (1..k).step_by(2).map(|j| j as f64).product();
    let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * double_fact / s.powi(k as i32)
}

/// `coeff · Π_μ f_μ(p'_μ) · Π_μ h_μ(q'_μ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub coeff: f64,
    pub p_axes: Vec<AxisFactor>,
    pub q_axes: Vec<AxisFactor>,
    pub experimental: bool,
}

impl SeparableTerm {
    pub fn is_regular(&self) -> bool {
        !self.p_axes.iter().chain(&self.q_axes).any(|f| matches!(f, AxisFactor::Delta(_)))
    }
}

/// `J` at a fixed base point as a sum of separable terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JDistribution {
    pub kind: JKind,
    pub dim: usize,
    pub hbar: f64,
    pub terms: Vec<SeparableTerm>,
}

impl JDistribution {
    pub fn has_deltas(&self) -> bool {
        self.terms.iter().any(|t| !t.is_regular())
    }

    /// Sum of the δ-free terms at `(p', q')`.
    pub fn regular(&self, p_prime: &[f64], q_prime: &[f64]) -> Result<f64> {
        if p_prime.len() != self.dim || q_prime.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: p_prime.len().max(q_prime.len()) });
        }
        let mut acc = 0.0;
        for t in self.terms.iter().filter(|t| t.is_regular()) {
            let mut v = t.coeff;
            for mu in 0..self.dim {
                v *= t.p_axes[mu].value(p_prime[mu], self.hbar).unwrap();
                v *= t.q_axes[mu].value(q_prime[mu], self.hbar).unwrap();
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Pointwise value; fails when δ components are present.
    pub fn eval(&self, p_prime: &[f64], q_prime: &[f64]) -> Result<f64> {
        if self.has_deltas() {
            return Err(Error::Domain("J has δ components; pair it with a test function".into()));
        }
        self.regular(p_prime, q_prime)
    }

    /// `∫ J φ dp'dq'` for `φ = exp(−|(p',q')|²/(2s²))`.
    pub fn pair_gaussian(&self, s: f64, include_experimental: bool) -> Result<f64> {
        if s <= 0.0 {
            return Err(Error::InvalidArgument("test width must be positive".into()));
        }
        let mut acc = 0.0;
        for t in &self.terms {
            if t.experimental && !include_experimental {
                continue;
            }
            let mut v = t.coeff;
            for f in t.p_axes.iter().chain(&t.q_axes) {
                v *= f.pair_gaussian(self.hbar, s);
            }
            acc += v;
        }
        Ok(acc)
    }
}

fn check_point(dim: usize, point: &[f64], boxed: bool) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if point.len() != 2 * dim {
        return Err(Error::DimensionMismatch { expected: 2 * dim, found: point.len() });
    }
    if boxed && point.iter().any(|x| x.abs() > 1.0) {
        return Err(Error::Domain("box observables need |p_μ|, |q_μ| ≤ 1".into()));
    }
    Ok(())
}

fn deltas(dim: usize) -> Vec<AxisFactor> {
    vec![AxisFactor::Delta(0); dim]
}

/// Expand `Re{f₁f₂f₃f₄}` into real separable pieces. Each input is
/// `(on_p_axis, axis, b, conj)`.
fn real_part_of_product(
    coeff: f64,
    dim: usize,
    background: (&[AxisFactor], &[AxisFactor]),
    factors: [(bool, usize, f64, bool); 4],
    limit_hbar: Option<f64>,
) -> Vec<SeparableTerm> {
    let mut out = Vec::new();
    for mask in 0u32..16 {
        let n_im = mask.count_ones();
        if n_im % 2 == 1 {
            continue;
        }
        let sign = if (n_im / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let (mut p_axes, mut q_axes) = (background.0.to_vec(), background.1.to_vec());
        let mut c = coeff * sign;
        for (i, &(on_p, axis, b, conj)) in factors.iter().enumerate() {
            let imag = mask & (1 << i) != 0;
            let f = match limit_hbar {
                // F → (ħ/2)δ' − ib δ
                Some(h) => {
                    if imag {
                        c *= if conj { b } else { -b };
                        AxisFactor::Delta(0)
                    } else {
                        c *= h / 2.0;
                        AxisFactor::Delta(1)
                    }
                }
                None => AxisFactor::F { b, imag, conj },
            };
            if on_p {
                p_axes[axis] = f;
            } else {
                q_axes[axis] = f;
            }
        }
        debug_assert_eq!(p_axes.len(), dim);
        out.push(SeparableTerm { coeff: c, p_axes, q_axes, experimental: true });
    }
    out
}

/// Closed-form `J(p, q; p', q')` at `point = (p.., q..)`.
pub fn j_analytic(kind: JKind, dim: usize, point: &[f64], hbar: f64) -> Result<JDistribution> {
    if hbar <= 0.0 {
        return Err(Error::InvalidArgument("ħ must be positive".into()));
    }
    check_point(dim, point, kind != JKind::Q1Unbounded)?;
    let (p, q) = point.split_at(dim);
    let norm = (2.0 * PI * hbar).powi(dim as i32);
    let mut terms = Vec::new();
    match kind {
        JKind::Q1Unbounded => {
            terms.push(SeparableTerm { coeff: norm * q[0] * q[0], p_axes: deltas(dim), q_axes: deltas(dim), experimental: false });
            let mut p_axes = deltas(dim);
            p_axes[0] = AxisFactor::Delta(2);
            terms.push(SeparableTerm { coeff: norm * hbar * hbar / 4.0, p_axes, q_axes: deltas(dim), experimental: false });
        }
        JKind::P1Box => {
            let (mut p_axes, mut q_axes) = (deltas(dim), deltas(dim));
            p_axes[0] = AxisFactor::Sinc { g: g_of(q[0]) };
            q_axes[0] = AxisFactor::Edge { b: p[0] };
            terms.push(SeparableTerm { coeff: norm, p_axes, q_axes, experimental: false });
        }
        JKind::PqBox => {
            let sinc_p: Vec<_> = (0..dim).map(|l| AxisFactor::Sinc { g: g_of(q[l]) }).collect();
            let sinc_q: Vec<_> = (0..dim).map(|l| AxisFactor::Sinc { g: g_of(p[l]) }).collect();
            for mu in 0..dim {
                let (mut p_axes, mut q_axes) = (sinc_p.clone(), sinc_q.clone());
                p_axes[mu] = AxisFactor::Edge { b: q[mu] };
                q_axes[mu] = AxisFactor::Edge { b: p[mu] };
                terms.push(SeparableTerm { coeff: norm, p_axes, q_axes, experimental: false });
            }
            for mu in 0..dim {
                for nu in (0..dim).filter(|&n| n != mu) {
                    // F(q'_μ,p_μ) F*(p'_μ,q_μ) F*(q'_ν,p_ν) F(p'_ν,q_ν)
                    let factors = [
                        (false, mu, p[mu], false),
                        (true, mu, q[mu], true),
                        (false, nu, p[nu], true),
                        (true, nu, q[nu], false),
                    ];
                    terms.extend(real_part_of_product(norm, dim, (&sinc_p, &sinc_q), factors, None));
                }
            }
        }
    }
    Ok(JDistribution { kind, dim, hbar, terms })
}

/// The `ħ → 0` form in which every box-edge sinc has become a δ.
pub fn j_analytic_limit(kind: JKind, dim: usize, point: &[f64], hbar: f64) -> Result<JDistribution> {
    if hbar <= 0.0 {
        return Err(Error::InvalidArgument("ħ must be positive".into()));
    }
    check_point(dim, point, kind != JKind::Q1Unbounded)?;
    let (p, q) = point.split_at(dim);
    let norm = (2.0 * PI * hbar).powi(dim as i32);
    let h2 = hbar * hbar / 4.0;
    // [b²δ + (ħ²/4)δ''] on one axis as two (coefficient, factor) pieces
    let pieces = |b: f64| [(b * b, AxisFactor::Delta(0)), (h2, AxisFactor::Delta(2))];
    let mut terms = Vec::new();
    match kind {
        JKind::Q1Unbounded => return j_analytic(kind, dim, point, hbar),
        JKind::P1Box => {
            for (c, f) in pieces(p[0]) {
                let mut q_axes = deltas(dim);
                q_axes[0] = f;
                terms.push(SeparableTerm { coeff: norm * c, p_axes: deltas(dim), q_axes, experimental: false });
            }
        }
        JKind::PqBox => {
            for mu in 0..dim {
                for (cq, fq) in pieces(p[mu]) {
                    for (cp, fp) in pieces(q[mu]) {
                        let (mut p_axes, mut q_axes) = (deltas(dim), deltas(dim));
                        p_axes[mu] = fp;
                        q_axes[mu] = fq;
                        terms.push(SeparableTerm { coeff: norm * cq * cp, p_axes, q_axes, experimental: false });
                    }
                }
            }
            for mu in 0..dim {
                for nu in (0..dim).filter(|&n| n != mu) {
                    let factors = [
                        (false, mu, p[mu], false),
                        (true, mu, q[mu], true),
                        (false, nu, p[nu], true),
                        (true, nu, q[nu], false),
                    ];
                    let bg = deltas(dim);
                    terms.extend(real_part_of_product(norm, dim, (&bg, &bg), factors, Some(hbar)));
                }
            }
        }
    }
    Ok(JDistribution { kind, dim, hbar, terms })
}
