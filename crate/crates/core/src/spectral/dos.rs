use crate::error::{Error, Result};

/// Gaussian-kernel density of states, `ρ(E) = Σ_i N(E; E_i, σ)`.
#[derive(Clone, Debug)]
pub struct DensityOfStates {
    levels: Vec<f64>,
    sigma: f64,
}

/// Default kernel width in units of the mean level spacing.
pub const DEFAULT_WINDOW_SPACINGS: f64 = 3.0;

fn mean_spacing(levels: &[f64]) -> f64 {
    let (lo, hi) = levels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    (hi - lo) / (levels.len() - 1) as f64
}

impl DensityOfStates {
    /// Kernel standard deviation `window`, which must exceed the mean spacing.
    pub fn new(levels: &[f64], window: f64) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if levels.len() > 1 {
            let sp = mean_spacing(levels);
            if !(window > sp) {
                return Err(Error::InvalidArgument(format!("window {window} not above mean spacing {sp}")));
            }
        } else if !(window > 0.0) {
            return Err(Error::InvalidArgument("window must be positive".into()));
        }
        let mut levels = levels.to_vec();
        levels.sort_by(f64::total_cmp);
        Ok(DensityOfStates { levels, sigma: window })
    }

    /// Kernel width of three mean level spacings.
    pub fn with_default_window(levels: &[f64]) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::EmptySpectrum);
        }
        Self::new(levels, DEFAULT_WINDOW_SPACINGS * mean_spacing(levels))
    }

    pub fn window(&self) -> f64 {
        self.sigma
    }

    pub fn eval(&self, e: f64) -> f64 {
        let s = self.sigma;
        let cut = 10.0 * s;
        let lo = self.levels.partition_point(|&x| x < e - cut);
        let hi = self.levels.partition_point(|&x| x <= e + cut);
        let norm = 1.0 / (s * (2.0 * std::f64::consts::PI).sqrt());
        self.levels[lo..hi].iter().map(|&x| (-0.5 * ((e - x) / s).powi(2)).exp()).sum::<f64>() * norm
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}
