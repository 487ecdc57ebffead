//! Threshold regions `R_ε = {X' : J̃(X') ≥ ε·J̃_max}` and their widths.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// A real even function on `ℝⁿ` whose superlevel sets we measure.
pub trait Kernel: Sync {
    fn arity(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Typical length over which the kernel changes.
    fn scale(&self) -> f64;
}

/// `exp(−|x|²/(2σ²))`, a rotationally symmetric test kernel.
#[derive(Clone, Copy, Debug)]
pub struct GaussianKernel {
    pub arity: usize,
    pub sigma: f64,
}

impl Kernel for GaussianKernel {
    fn arity(&self) -> usize {
        self.arity
    }
    fn value(&self, x: &[f64]) -> f64 {
        (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * self.sigma * self.sigma)).exp()
    }
    fn scale(&self) -> f64 {
        self.sigma
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionOptions {
    /// Rays cast from the origin over a half-sphere.
    pub rays: usize,
    /// Radial scan resolution, in steps per kernel scale.
    pub steps_per_scale: usize,
    /// Radial scan reach, in kernel scales.
    pub reach: f64,
    /// Polish the support point by a local search over ray directions.
    pub refine: bool,
    /// Seed for ray directions in more than two dimensions.
    pub seed: u64,
}

impl Default for RegionOptions {
    fn default() -> Self {
        RegionOptions { rays: 180, steps_per_scale: 6, reach: 24.0, refine: true, seed: 0 }
    }
}

/// Peak, threshold and widths of one region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JEvaluation {
    pub epsilon: f64,
    pub peak: f64,
    pub peak_at: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub widths: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

/// The region `R_ε` of a kernel, traced by its outermost crossing along rays.
pub struct Region<'a, K: Kernel + ?Sized> {
    kernel: &'a K,
    epsilon: f64,
    opts: RegionOptions,
    peak: f64,
    peak_at: Vec<f64>,
    threshold: f64,
    dirs: Vec<Vec<f64>>,
    radii: Vec<f64>,
}

fn unit(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_direction(n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if v.iter().any(|x| *x != 0.0) {
            unit(&mut v);
            return v;
        }
    }
}

fn locate_peak<K: Kernel + ?Sized>(k: &K) -> Result<(f64, Vec<f64>)> {
    let n = k.arity();
    let origin = vec![0.0; n];
    let v0 = k.value(&origin);
    if !v0.is_finite() {
        return Err(Error::Domain("kernel is not finite at the origin".into()));
    }
    let s = k.scale();
    let per_axis: usize = match n {
        0..=2 => 41,
        3..=4 => 9,
        _ => 3,
    };
    let h = 8.0 * s / (per_axis - 1) as f64;
    let total = per_axis.pow(n as u32);
    let samples = par::map_range(total, |idx| {
        let mut x = vec![0.0; n];
        let mut r = idx;
        for xi in x.iter_mut() {
            *xi = -4.0 * s + h * (r % per_axis) as f64;
            r /= per_axis;
        }
        let v = k.value(&x);
        (v, x)
    });
    let (mut best, mut at) = (v0, origin);
    for (v, x) in samples {
        if v > best + 1e-12 * best.abs().max(f64::MIN_POSITIVE) {
            best = v;
            at = x;
        }
    }
    if at.iter().any(|x| *x != 0.0) {
        let mut step = h;
        while step > 1e-7 * s {
            let mut moved = false;
            for i in 0..n {
                for sgn in [-1.0, 1.0] {
                    let mut y = at.clone();
                    y[i] += sgn * step;
                    let v = k.value(&y);
                    if v > best {
                        best = v;
                        at = y;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
    }
    if best <= 0.0 {
        return Err(Error::Domain("kernel has no positive maximum".into()));
    }
    Ok((best, at))
}

impl<'a, K: Kernel + ?Sized> Region<'a, K> {
    pub fn new(kernel: &'a K, epsilon: f64, opts: RegionOptions) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("threshold ε={epsilon} outside (0,1)")));
        }
        if opts.rays < 2 || opts.steps_per_scale == 0 || opts.reach <= 0.0 {
            return Err(Error::InvalidArgument("degenerate region scan options".into()));
        }
        let (peak, peak_at) = locate_peak(kernel)?;
        let n = kernel.arity();
        let dirs: Vec<Vec<f64>> = if n == 2 {
            (0..opts.rays)
                .map(|k| {
                    let t = std::f64::consts::PI * k as f64 / opts.rays as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        } else {
            (0..opts.rays).map(|k| random_direction(n, opts.seed, k as u64)).collect()
        };
        let mut region = Region {
            kernel,
            epsilon,
            opts,
            peak,
            peak_at,
            threshold: epsilon * peak,
            dirs,
            radii: Vec::new(),
        };
        let radii = par::map_slice(&region.dirs, |v| region.extent(v));
        region.radii = radii.into_iter().collect::<Result<_>>()?;
        Ok(region)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn peak_at(&self) -> &[f64] {
        &self.peak_at
    }

    /// Ray directions and the outermost threshold crossing along each.
    pub fn boundary(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.dirs.iter().map(|d| d.as_slice()).zip(self.radii.iter().copied())
    }

    /// Outermost `t ≥ 0` with `J̃(t·v) ≥ ε·J̃_max`, or 0 when the ray never enters.
    fn extent(&self, v: &[f64]) -> Result<f64> {
        let k = self.kernel;
        let dt = k.scale() / self.opts.steps_per_scale as f64;
        let steps = (self.opts.reach * self.opts.steps_per_scale as f64).ceil() as usize;
        let f = |t: f64| {
            let x: Vec<f64> = v.iter().map(|c| c * t).collect();
            k.value(&x) - self.threshold
        };
        let mut last = None;
        for i in (0..=steps).rev() {
            let val = f(i as f64 * dt);
            if val.is_nan() {
                return Err(Error::Domain("kernel evaluation failed".into()));
            }
            if val >= 0.0 {
                last = Some(i);
                break;
            }
        }
        let Some(i) = last else { return Ok(0.0) };
        if i == steps {
            return Err(Error::UnboundedRegion(v.to_vec()));
        }
        let (mut lo, mut hi) = (i as f64 * dt, (i + 1) as f64 * dt);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `max_{X' ∈ R_ε} X'·u` for a unit vector `u`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        let n = self.kernel.arity();
        if u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.len() });
        }
        let mut u = u.to_vec();
        unit(&mut u);
        let (mut best_k, mut best) = (0, f64::NEG_INFINITY);
        for (k, (d, r)) in self.boundary().enumerate() {
            let h = r * dot(d, &u).abs();
            if h > best {
                best = h;
                best_k = k;
            }
        }
        if !self.opts.refine {
            return Ok(best);
        }
        if n == 2 {
            let t0 = std::f64::consts::PI * best_k as f64 / self.opts.rays as f64;
            let half = std::f64::consts::PI / self.opts.rays as f64;
            let g = |t: f64| -> Result<f64> {
                let v = [t.cos(), t.sin()];
                Ok(self.extent(&v)? * dot(&v, &u).abs())
            };
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            let (mut a, mut b) = (t0 - half, t0 + half);
            let mut c = b - phi * (b - a);
            let mut d = a + phi * (b - a);
            let (mut gc, mut gd) = (g(c)?, g(d)?);
            for _ in 0..40 {
                if gc > gd {
                    b = d;
                    d = c;
                    gd = gc;
                    c = b - phi * (b - a);
                    gc = g(c)?;
                } else {
                    a = c;
                    c = d;
                    gc = gd;
                    d = a + phi * (b - a);
                    gd = g(d)?;
                }
            }
            best = best.max(gc).max(gd);
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x5eed);
            let mut dir = self.dirs[best_k].clone();
            let mut delta = 1.0 / (self.opts.rays as f64).sqrt();
            for _ in 0..80 {
                let mut trial: Vec<f64> =
                    dir.iter().map(|x| { let z: f64 = StandardNormal.sample(&mut rng); x + delta * z }).collect();
                unit(&mut trial);
                let h = self.extent(&trial)? * dot(&trial, &u).abs();
                if h > best {
                    best = h;
                    dir = trial;
                } else {
                    delta *= 0.9;
                }
            }
        }
        Ok(best)
    }

    /// `δ_ε^u J̃ = 2·max_{X' ∈ R_ε} X'·u`.
    pub fn width(&self, u: &[f64]) -> Result<f64> {
        Ok(2.0 * self.support(u)?)
    }

    /// Average width over `n` uniformly random directions; direction `k` is
    /// drawn from stream `k` of a ChaCha8 generator seeded with `seed`.
    pub fn mean_width(&self, n: usize, seed: u64) -> Result<JEvaluation> {
        if n < 32 {
            return Err(Error::InvalidArgument(format!("need at least 32 directions, got {n}")));
        }
        let dim = self.kernel.arity();
        let directions: Vec<Vec<f64>> = (0..n).map(|k| random_direction(dim, seed, k as u64)).collect();
        let widths = par::map_slice(&directions, |u| self.width(u)).into_iter().collect::<Result<Vec<_>>>()?;
        let mean = widths.iter().sum::<f64>() / n as f64;
        let var = widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        Ok(JEvaluation {
            epsilon: self.epsilon,
            peak: self.peak,
            peak_at: self.peak_at.clone(),
            directions,
            widths,
            mean,
            stderr: (var / n as f64).sqrt(),
        })
    }
}

/// Width of `R_ε` along `direction` with default scan options.
pub fn region_width<K: Kernel + ?Sized>(kernel: &K, direction: &[f64], epsilon: f64) -> Result<f64> {
    Region::new(kernel, epsilon, RegionOptions::default())?.width(direction)
}

/// Direction-averaged width of `R_ε` with default scan options.
pub fn mean_width<K: Kernel + ?Sized>(kernel: &K, epsilon: f64, n: usize, seed: u64) -> Result<JEvaluation> {
    Region::new(kernel, epsilon, RegionOptions::default())?.mean_width(n, seed)
}

/// `index,u1,…,un,width` per sampled direction.
pub fn write_jprofile_csv<W: Write>(mut w: W, eval: &JEvaluation) -> std::io::Result<()> {
    let n = eval.directions.first().map_or(0, |d| d.len());
    let cols: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    writeln!(w, "index,{},width", cols.join(","))?;
    for (k, (d, width)) in eval.directions.iter().zip(&eval.widths).enumerate() {
        let comps: Vec<String> = d.iter().map(|x| format!("{x:.12e}")).collect();
        writeln!(w, "{k},{},{width:.12e}", comps.join(","))?;
    }
    Ok(())
}
