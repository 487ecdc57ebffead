//! Microcanonical phase-space machinery: thin-shell sampling, the surface
//! measure `S(E) = ∫dz δ(H − E)`, gradient averages, the off-diagonal
//! predictor built on shell-averaged Wigner functions, and bandwidth
//! estimates.
//!
//! Phase points are laid out as `(p_1..p_d, q_1..q_d)`. Two-mode models are
//! split into subsystem A = `(p_1, q_1)` and B = `(p_2, q_2)`.

mod bandwidth;
mod curves;
mod predictor;
mod shell;

pub use bandwidth::{bandwidth_estimate, BandwidthConfig, BandwidthEstimate, BoxRule};
pub use curves::{level_curve, CurveConfig, CurvePoint};
pub use predictor::{
    semiclassical_offdiag, semiclassical_profile, write_semiclassical_csv, ADomain, PredictorConfig, PredictorMode,
    SemiclassicalProfile, ZbSampling,
};
pub use shell::{mean_grad_norm, sample_shell, surface_area, Restrict, ShellSample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmg::{self, LmgParams, PhasePoint};

/// Value with a Monte Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// A classical Hamiltonian on a ball of phase space.
pub trait ClassicalModel: Sync {
    /// Number of degrees of freedom `d`.
    fn dim(&self) -> usize;
    /// Radius of the ball in `ℝ^{2d}` that contains every reachable point.
    fn radius(&self) -> f64;
    fn h(&self, z: &[f64]) -> Result<f64>;
    /// `(∂H/∂p_1.., ∂H/∂q_1..)`.
    fn grad(&self, z: &[f64]) -> Result<Vec<f64>>;
}

/// A two-mode model with subsystem A = `(p_1, q_1)`.
pub trait SplitModel: ClassicalModel {
    /// Radius of the admissible A-disk at fixed `z_B = (p_2, q_2)`; `None`
    /// when A is unbounded.
    fn a_radius(&self, zb: [f64; 2]) -> Option<f64>;
    /// Radius of the disk over which `z_B` ranges.
    fn b_radius(&self) -> f64;
}

/// The classical LMG Hamiltonian on the ball `G ≤ 2`.
#[derive(Clone, Copy, Debug)]
pub struct LmgModel(pub LmgParams);

fn as_point(z: &[f64]) -> Result<PhasePoint> {
    if z.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: z.len() });
    }
    Ok(PhasePoint { p1: z[0], p2: z[1], q1: z[2], q2: z[3] })
}

impl ClassicalModel for LmgModel {
    fn dim(&self) -> usize {
        2
    }
    fn radius(&self) -> f64 {
        2f64.sqrt()
    }
    fn h(&self, z: &[f64]) -> Result<f64> {
        lmg::classical_h(&self.0, &as_point(z)?)
    }
    fn grad(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(lmg::grad_h(&self.0, &as_point(z)?)?.to_vec())
    }
}

impl SplitModel for LmgModel {
    fn a_radius(&self, zb: [f64; 2]) -> Option<f64> {
        Some((2.0 - zb[0] * zb[0] - zb[1] * zb[1]).max(0.0).sqrt())
    }
    fn b_radius(&self) -> f64 {
        2f64.sqrt()
    }
}

/// `H = |z|²/2` in `d` degrees of freedom, restricted to a ball.
#[derive(Clone, Copy, Debug)]
pub struct IsotropicStub {
    pub dim: usize,
    pub radius: f64,
}

impl ClassicalModel for IsotropicStub {
    fn dim(&self) -> usize {
        self.dim
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn h(&self, z: &[f64]) -> Result<f64> {
        if z.len() != 2 * self.dim {
            return Err(Error::DimensionMismatch { expected: 2 * self.dim, found: z.len() });
        }
        Ok(0.5 * z.iter().map(|x| x * x).sum::<f64>())
    }
    fn grad(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(z.to_vec())
    }
}

/// `H = ½(p_1² + q_1²) + ½ω_B(p_2² + q_2²)`: two uncoupled oscillators, A
/// unbounded.
#[derive(Clone, Copy, Debug)]
pub struct SeparableStub {
    pub omega_b: f64,
    pub radius: f64,
}

impl ClassicalModel for SeparableStub {
    fn dim(&self) -> usize {
        2
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn h(&self, z: &[f64]) -> Result<f64> {
        if z.len() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: z.len() });
        }
        Ok(0.5 * (z[0] * z[0] + z[2] * z[2]) + 0.5 * self.omega_b * (z[1] * z[1] + z[3] * z[3]))
    }
    fn grad(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![z[0], self.omega_b * z[1], z[2], self.omega_b * z[3]])
    }
}

impl SplitModel for SeparableStub {
    fn a_radius(&self, _zb: [f64; 2]) -> Option<f64> {
        None
    }
    fn b_radius(&self) -> f64 {
        self.radius
    }
}

/// `τ = ħ/w_b`, the time scale on which the band of width `w_b` dephases.
pub fn thermalization_time(w_b: f64, hbar: f64) -> Result<f64> {
    if !(w_b > 0.0) {
        return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {w_b}")));
    }
    Ok(hbar / w_b)
}
