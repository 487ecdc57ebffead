use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::{ClassicalModel, Estimate};
use crate::error::{Error, Result};
use crate::par;

/// Attempts per independently seeded chunk.
const CHUNK: u64 = 4096;
/// Chunks drawn per parallel round.
const ROUND: usize = 16;
const MIN_ACCEPTANCE: f64 = 1e-6;
/// Attempts after which a low acceptance ratio is treated as final.
const ACCEPTANCE_PROBE: u64 = 1 << 24;

/// Points drawn uniformly from `|H − E| ≤ ΔE/2` inside the sampling ball.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellSample {
    pub dim: usize,
    pub energy: f64,
    pub delta_e: f64,
    pub radius: f64,
    pub points: Vec<Vec<f64>>,
    pub attempts: u64,
    pub seed: u64,
}

impl ShellSample {
    pub fn acceptance(&self) -> f64 {
        self.points.len() as f64 / self.attempts as f64
    }
}

/// Volume of the ball of radius `r` in `ℝ^{2d}`: `π^d r^{2d} / d!`.
pub(crate) fn ball_volume(d: usize, r: f64) -> f64 {
    let mut v = 1.0;
    for k in 1..=d {
        v *= std::f64::consts::PI * r * r / k as f64;
    }
    v
}

pub(crate) fn uniform_in_ball<R: rand::Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let u: f64 = Uniform::new(0.0, 1.0).expect("valid range").sample(rng);
        let r = radius * u.powf(1.0 / n as f64) / norm;
        x.iter_mut().for_each(|v| *v *= r);
        return x;
    }
}

fn draw_chunk<M: ClassicalModel + ?Sized>(model: &M, e: f64, half: f64, seed: u64, chunk: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let n = 2 * model.dim();
    let mut out = Vec::new();
    for _ in 0..CHUNK {
        let z = uniform_in_ball(&mut rng, n, model.radius());
        if let Ok(h) = model.h(&z) {
            if (h - e).abs() <= half {
                out.push(z);
            }
        }
    }
    out
}

/// Rejection-sample the shell `|H − E| ≤ ΔE/2` until `n_target` points are
/// found. Chunk `k` of 4096 attempts uses ChaCha8 stream `k` of `seed`, so
/// the result does not depend on the thread count.
pub fn sample_shell<M: ClassicalModel + ?Sized>(
    model: &M,
    energy: f64,
    delta_e: f64,
    n_target: usize,
    seed: u64,
) -> Result<ShellSample> {
    if !(delta_e > 0.0) || n_target == 0 {
        return Err(Error::InvalidArgument(format!("need ΔE > 0 and n_target > 0, got {delta_e}, {n_target}")));
    }
    let half = 0.5 * delta_e;
    let mut points = Vec::with_capacity(n_target);
    let mut next_chunk = 0u64;
    while points.len() < n_target {
        let base = next_chunk;
        let rounds = par::map_range(ROUND, |k| draw_chunk(model, energy, half, seed, base + k as u64));
        next_chunk += ROUND as u64;
        for r in rounds {
            points.extend(r);
        }
        let attempts = next_chunk * CHUNK;
        let ratio = points.len() as f64 / attempts as f64;
        if attempts >= ACCEPTANCE_PROBE && ratio < MIN_ACCEPTANCE {
            return Err(Error::ZeroAcceptance(ratio));
        }
    }
    // Whole rounds are kept so the acceptance ratio stays unbiased.
    let attempts = next_chunk * CHUNK;
    for z in &points {
        let h = model.h(z)?;
        assert!((h - energy).abs() <= half, "shell point violates |H − E| ≤ ΔE/2");
    }
    Ok(ShellSample { dim: model.dim(), energy, delta_e, radius: model.radius(), points, attempts, seed })
}

/// `S(E) = vol(shell)/ΔE` with its binomial standard error.
pub fn surface_area(sample: &ShellSample) -> Result<Estimate> {
    let hits = sample.points.len() as f64;
    if hits == 0.0 || sample.attempts == 0 {
        return Err(Error::ZeroAcceptance(0.0));
    }
    let n = sample.attempts as f64;
    let p = hits / n;
    let scale = ball_volume(sample.dim, sample.radius) / sample.delta_e;
    Ok(Estimate { value: scale * p, stderr: scale * (p * (1.0 - p) / n).sqrt() })
}

/// Which gradient components enter [`mean_grad_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Restrict {
    #[default]
    Full,
    /// `(∂_{p_1}, ∂_{q_1})` only.
    SubsystemA,
}

/// Shell average of `|∇H|` (or `|∇_A H|`). Points where the gradient is
/// singular are dropped; more than 1% of them is an error.
pub fn mean_grad_norm<M: ClassicalModel + ?Sized>(sample: &ShellSample, model: &M, restrict: Restrict) -> Result<Estimate> {
    let d = model.dim();
    let norms = par::map_slice(&sample.points, |z| {
        model.grad(z).ok().map(|g| match restrict {
            Restrict::Full => g.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Restrict::SubsystemA => g[0].hypot(g[d]),
        })
    });
    let good: Vec<f64> = norms.iter().flatten().copied().filter(|x| x.is_finite()).collect();
    let bad = sample.points.len() - good.len();
    if good.is_empty() || bad as f64 > 0.01 * sample.points.len() as f64 {
        return Err(Error::Domain(format!("gradient singular at {bad} of {} shell points", sample.points.len())));
    }
    Ok(mean_and_stderr(&good))
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Estimate { value: mean, stderr: f64::NAN };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate { value: mean, stderr: (var / n).sqrt() }
}
