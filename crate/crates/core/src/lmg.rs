//! Three-orbital Lipkin-Meshkov-Glick model: quantum Hamiltonian on the
//! collective Fock basis, its classical counterpart on the ball `G <= 2`,
//! and phase-space gradients.
//!
//! The deformation parameter `a` multiplies the orbital-1 energy and the
//! interaction, on both the quantum and the classical side.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{FockBasis, HermitianMatrix};
use crate::error::{Error, Result};
use crate::weylcalc::PhasePolynomial;

/// Bundled default parameter file.
pub const REFERENCE_PARAMS_JSON: &str = include_str!("../config/lmg-reference.json");

/// Classical (Ω-independent) parameters plus the particle number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmgParams {
    pub omega: u32,
    #[serde(default = "one")]
    pub a: f64,
    pub lambda: f64,
    pub eps1p: f64,
    pub eps2p: f64,
    pub mu1p: f64,
    pub mu2p: f64,
    pub mu3p: f64,
    pub mu4p: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for LmgParams {
    fn default() -> Self {
        serde_json::from_str(REFERENCE_PARAMS_JSON).expect("bundled parameter file is valid")
    }
}

impl LmgParams {
    pub fn with_omega(self, omega: u32) -> Self {
        LmgParams { omega, ..self }
    }

    pub fn with_a(self, a: f64) -> Self {
        LmgParams { a, ..self }
    }

    /// Effective Planck constant `1/Ω`.
    pub fn hbar_eff(&self) -> f64 {
        1.0 / self.omega as f64
    }

    /// Quantum single-particle energies `ε_r = ε'_r ħ`.
    pub fn eps(&self) -> [f64; 2] {
        let h = self.hbar_eff();
        [self.eps1p * h, self.eps2p * h]
    }

    /// Quantum couplings `μ_t = μ'_t ħ²`.
    pub fn mu(&self) -> [f64; 4] {
        let h2 = self.hbar_eff().powi(2);
        [self.mu1p * h2, self.mu2p * h2, self.mu3p * h2, self.mu4p * h2]
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega == 0 {
            return Err(Error::InvalidArgument("omega must be positive".into()));
        }
        let vals = [self.a, self.lambda, self.eps1p, self.eps2p, self.mu1p, self.mu2p, self.mu3p, self.mu4p];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Orbital words of the four interaction terms `V^(t)`.
const V_WORDS: [[[(usize, usize); 2]; 2]; 4] = [
    [[(1, 0), (1, 0)], [(0, 1), (0, 1)]],
    [[(2, 0), (2, 0)], [(0, 2), (0, 2)]],
    [[(2, 1), (2, 0)], [(0, 2), (1, 2)]],
    [[(1, 2), (1, 0)], [(0, 1), (2, 1)]],
];

/// `H = a ε1 K11 + ε2 K22 + a λ Σ_t μ_t V^(t)`.
pub fn build_hamiltonian(params: &LmgParams, basis: &FockBasis) -> Result<HermitianMatrix> {
    params.validate()?;
    if basis.omega() != params.omega {
        return Err(Error::DimensionMismatch { expected: params.omega as usize, found: basis.omega() as usize });
    }
    let [e1, e2] = params.eps();
    let mu = params.mu();
    let d = basis.dim();
    let mut h = Mat::<f64>::zeros(d, d);
    for (j, &(n1, n2)) in basis.states().iter().enumerate() {
        h[(j, j)] += params.a * e1 * n1 as f64 + e2 * n2 as f64;
        for (t, words) in V_WORDS.iter().enumerate() {
            let c = params.a * params.lambda * mu[t];
            if c == 0.0 {
                continue;
            }
            for w in words {
                if let Some((amp, tgt)) = basis.apply_word(w, (n1, n2))? {
                    let i = basis.index(tgt.0, tgt.1).expect("sector preserved");
                    h[(i, j)] += c * amp;
                }
            }
        }
    }
    HermitianMatrix::new(h)
}

/// A point `(p1, p2, q1, q2)` of the classical phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
}

impl PhasePoint {
    pub fn new(p1: f64, p2: f64, q1: f64, q2: f64) -> Self {
        PhasePoint { p1, p2, q1, q2 }
    }

    pub fn from_array(z: [f64; 4]) -> Self {
        PhasePoint::new(z[0], z[1], z[2], z[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.p1, self.p2, self.q1, self.q2]
    }

    /// `G = p1² + p2² + q1² + q2²`.
    pub fn g(&self) -> f64 {
        self.p1 * self.p1 + self.p2 * self.p2 + self.q1 * self.q1 + self.q2 * self.q2
    }

    pub fn is_physical(&self) -> bool {
        self.g() <= 2.0
    }
}

fn check_domain(z: &PhasePoint) -> Result<f64> {
    let g = z.g();
    if !(g <= 2.0) {
        return Err(Error::Domain(format!("G = {g} exceeds 2")));
    }
    Ok(g)
}

/// Classical Hamiltonian.
pub fn classical_h(params: &LmgParams, z: &PhasePoint) -> Result<f64> {
    let g = check_domain(z)?;
    let PhasePoint { p1, p2, q1, q2 } = *z;
    let s = 1.0 - g / 2.0;
    let r = s.sqrt();
    let aa = q1 * q1 - p1 * p1;
    let bb = q2 * q2 - p2 * p2;
    let cc = bb * q1 - 2.0 * q2 * p1 * p2;
    let dd = aa * q2 - 2.0 * q1 * p1 * p2;
    let h0a = 0.5 * params.eps1p * (p1 * p1 + q1 * q1);
    let h0b = 0.5 * params.eps2p * (p2 * p2 + q2 * q2);
    let v = params.mu1p * aa * s
        + params.mu2p * bb * s
        + std::f64::consts::FRAC_1_SQRT_2 * r * (params.mu3p * cc + params.mu4p * dd);
    Ok(params.a * h0a + h0b + params.a * params.lambda * v)
}

/// Analytic gradient `(∂p1, ∂p2, ∂q1, ∂q2) H_cl`. Singular on the sphere `G = 2`
/// because of the `√(1 − G/2)` factor.
pub fn grad_h(params: &LmgParams, z: &PhasePoint) -> Result<[f64; 4]> {
    let g = check_domain(z)?;
    let PhasePoint { p1, p2, q1, q2 } = *z;
    let s = 1.0 - g / 2.0;
    if s <= 0.0 {
        return Err(Error::Domain("gradient is singular on G = 2".into()));
    }
    let r = s.sqrt();
    let x = [p1, p2, q1, q2];
    let aa = q1 * q1 - p1 * p1;
    let bb = q2 * q2 - p2 * p2;
    let cc = bb * q1 - 2.0 * q2 * p1 * p2;
    let dd = aa * q2 - 2.0 * q1 * p1 * p2;
    let d_a = [-2.0 * p1, 0.0, 2.0 * q1, 0.0];
    let d_b = [0.0, -2.0 * p2, 0.0, 2.0 * q2];
    let d_c = [-2.0 * q2 * p2, -2.0 * p2 * q1 - 2.0 * q2 * p1, bb, 2.0 * q2 * q1 - 2.0 * p1 * p2];
    let d_d = [-2.0 * p1 * q2 - 2.0 * q1 * p2, -2.0 * q1 * p1, 2.0 * q1 * q2 - 2.0 * p1 * p2, aa];
    let k = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = [0.0; 4];
    for i in 0..4 {
        let ds = -x[i];
        let dr = -x[i] / (2.0 * r);
        let dv = params.mu1p * (d_a[i] * s + aa * ds)
            + params.mu2p * (d_b[i] * s + bb * ds)
            + k * params.mu3p * (d_c[i] * r + cc * dr)
            + k * params.mu4p * (d_d[i] * r + dd * dr);
        let dh0 = match i {
            0 | 2 => params.a * params.eps1p * x[i],
            _ => params.eps2p * x[i],
        };
        out[i] = dh0 + params.a * params.lambda * dv;
    }
    Ok(out)
}

/// Subsystem-A gradient `(∂p1, ∂q1) H_cl`.
pub fn grad_a(params: &LmgParams, z: &PhasePoint) -> Result<[f64; 2]> {
    let g = grad_h(params, z)?;
    Ok([g[0], g[2]])
}

/// Weyl symbol of the observable `K_11/Ω`, obtained as `½ (q1 − i p1) ⋆ (q1 + i p1)`
/// with ħ = 1/Ω: `½(p1² + q1²) − ħ/2`. Dimension 2.
pub fn observable_symbol() -> PhasePolynomial {
    let i = Complex64::new(0.0, 1.0);
    let q = PhasePolynomial::q(2, 1);
    let p = PhasePolynomial::p(2, 1);
    let bd = &q - &p.scale(i);
    let b = &q + &p.scale(i);
    bd.star(&b).expect("same dimension").scale(Complex64::new(0.5, 0.0))
}
