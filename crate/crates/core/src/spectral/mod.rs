//! Dense eigensolves and statistics of observables in the energy eigenbasis.

mod csv;
mod dos;
mod fit;
mod profile;

use faer::{Mat, Side};

use crate::basis::HermitianMatrix;
use crate::error::{Error, Result};
use crate::par;

pub use csv::{write_profile_csv, write_scaling_csv, write_spectrum_csv};
pub use dos::DensityOfStates;
pub use fit::{fit_scaling, Fit, FitModel};
pub use profile::{
    band_profile, diagonal_profile, eth_f_function, half_width, r_moments, BandProfile, ProfileConfig, RMoments,
    WidthRule,
};

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Largest residual `‖Hv − Ev‖` over all pairs, relative to `max|H|`.
    pub fn max_residual(&self, h: &HermitianMatrix) -> f64 {
        let hv = h.as_mat() * &self.vectors;
        let n = self.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            let mut r2 = 0.0;
            for i in 0..n {
                let d = hv[(i, k)] - self.values[k] * self.vectors[(i, k)];
                r2 += d * d;
            }
            worst = worst.max(r2.sqrt());
        }
        worst / h.max_abs().max(f64::MIN_POSITIVE)
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.vectors.transpose() * &self.vectors;
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - want).abs());
            }
        }
        worst
    }
}

/// Full eigendecomposition of a verified symmetric matrix.
pub fn diagonalize(h: &HermitianMatrix) -> Result<Spectrum> {
    if h.dim() == 0 {
        return Err(Error::EmptySpectrum);
    }
    let evd = h
        .as_mat()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Convergence(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..h.dim()).map(|i| s[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Convergence("non-finite eigenvalue".into()));
    }
    Ok(Spectrum { values, vectors: evd.U().to_owned() })
}

/// Eigenvalues only.
pub fn eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    if h.dim() == 0 {
        return Err(Error::EmptySpectrum);
    }
    h.as_mat()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Convergence(format!("{e:?}")))
}

/// `O_ij = v_iᵀ O v_j`. Diagonal operators take a cheaper path.
pub fn eigenbasis_elements(o: &HermitianMatrix, s: &Spectrum) -> Result<Mat<f64>> {
    let n = s.dim();
    if o.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: o.dim() });
    }
    let om = o.as_mat();
    let diagonal = (0..n).all(|j| (0..n).all(|i| i == j || om[(i, j)] == 0.0));
    let v = &s.vectors;
    // Fixed column blocks keep the rounding independent of the worker count.
    let nb = n.div_ceil(BLOCK);
    let blocks = par::map_range(nb, |b| {
        let (c0, w) = (b * BLOCK, BLOCK.min(n - b * BLOCK));
        let vb = v.subcols(c0, w);
        let ov = if diagonal { Mat::<f64>::from_fn(n, w, |i, j| om[(i, i)] * vb[(i, j)]) } else { om * vb };
        v.transpose() * &ov
    });
    let mut out = Mat::<f64>::zeros(n, n);
    for (b, blk) in blocks.iter().enumerate() {
        out.subcols_mut(b * BLOCK, blk.ncols()).copy_from(blk);
    }
    Ok(out)
}

const BLOCK: usize = 64;
