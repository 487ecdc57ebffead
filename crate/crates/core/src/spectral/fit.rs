use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// `y = intercept + slope·x`
    Linear,
    /// `y = prefactor·x^exponent`, fitted in log-log coordinates
    Power,
}

/// Least-squares fit result. For [`FitModel::Power`] `intercept` is
/// `ln(prefactor)` and `slope` is the exponent; `r2` is measured in the fitted
/// coordinates.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Fit {
    pub model: FitModel,
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

impl Fit {
    pub fn predict(&self, x: f64) -> f64 {
        match self.model {
            FitModel::Linear => self.intercept + self.slope * x,
            FitModel::Power => self.intercept.exp() * x.powf(self.slope),
        }
    }

    pub fn prefactor(&self) -> f64 {
        match self.model {
            FitModel::Linear => self.intercept,
            FitModel::Power => self.intercept.exp(),
        }
    }

    pub fn exponent(&self) -> f64 {
        self.slope
    }
}

pub fn fit_scaling(xs: &[f64], ys: &[f64], model: FitModel) -> Result<Fit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    if xs.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", xs.len())));
    }
    let (u, v): (Vec<f64>, Vec<f64>) = match model {
        FitModel::Linear => (xs.to_vec(), ys.to_vec()),
        FitModel::Power => {
            if xs.iter().chain(ys).any(|&t| !(t > 0.0)) {
                return Err(Error::DegenerateFit("power fit needs positive data".into()));
            }
            (xs.iter().map(|x| x.ln()).collect(), ys.iter().map(|y| y.ln()).collect())
        }
    };
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let sxx: f64 = u.iter().map(|x| (x - mu).powi(2)).sum();
    let sxy: f64 = u.iter().zip(&v).map(|(x, y)| (x - mu) * (y - mv)).sum();
    let syy: f64 = v.iter().map(|y| (y - mv).powi(2)).sum();
    if sxx <= 1e-300 * n {
        return Err(Error::DegenerateFit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = mv - slope * mu;
    let sse: f64 = u.iter().zip(&v).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(Fit { model, intercept, slope, r2 })
}
