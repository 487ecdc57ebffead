use serde::{Deserialize, Serialize};

use super::SplitModel;
use crate::error::Result;

/// Quadrature settings for level curves `H(·, z_B) = E` in the A-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveConfig {
    pub angles: usize,
    /// Radial scan points per ray before bisection.
    pub radial_steps: usize,
    /// Grid per axis for locating the interior minimum.
    pub center_grid: usize,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig { angles: 64, radial_steps: 160, center_grid: 33 }
    }
}

/// A point of a level curve with its coarea weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    /// Full phase point `(p1, p2, q1, q2)`.
    pub z: [f64; 4],
    /// `(∂_{p1} H, ∂_{q1} H)`.
    pub grad_a: [f64; 2],
    /// `dℓ/|∇_A H|` in the polar parameterization: `r dθ / |∂_r H|`.
    pub weight: f64,
}

fn full(za: [f64; 2], zb: [f64; 2]) -> [f64; 4] {
    [za[0], zb[0], za[1], zb[1]]
}

fn h_a<M: SplitModel + ?Sized>(m: &M, za: [f64; 2], zb: [f64; 2]) -> Option<f64> {
    m.h(&full(za, zb)).ok()
}

/// Grid search then pattern search for the minimum of `H(·, z_B)` on the
/// disk of radius `r`.
fn interior_min<M: SplitModel + ?Sized>(m: &M, zb: [f64; 2], r: f64, n: usize) -> Option<([f64; 2], f64)> {
    let mut best: Option<([f64; 2], f64)> = None;
    let rr = 0.999 * r;
    for i in 0..n {
        for j in 0..n {
            let p = -rr + 2.0 * rr * i as f64 / (n - 1) as f64;
            let q = -rr + 2.0 * rr * j as f64 / (n - 1) as f64;
            if p * p + q * q > rr * rr {
                continue;
            }
            if let Some(h) = h_a(m, [p, q], zb) {
                if best.is_none_or(|b| h < b.1) {
                    best = Some(([p, q], h));
                }
            }
        }
    }
    let (mut x, mut fx) = best?;
    let mut step = 2.0 * rr / (n - 1) as f64;
    while step > 1e-9 * r.max(1e-300) {
        let mut moved = false;
        for d in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            let y = [x[0] + step * d[0], x[1] + step * d[1]];
            if y[0] * y[0] + y[1] * y[1] > rr * rr {
                continue;
            }
            if let Some(h) = h_a(m, y, zb) {
                if h < fx {
                    x = y;
                    fx = h;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Some((x, fx))
}

/// Quadrature nodes for the level curve `H(p1, q1; z_B) = e`.
///
/// Rays leave the interior minimum of `H(·, z_B)` at equally spaced angles;
/// each sign change of `H − e` along a ray is bisected to a root. Every root
/// carries weight `r dθ / |∂_r H|`, so multi-component curves are summed.
/// For unbounded A the rays stop at the model's sampling radius.
pub fn level_curve<M: SplitModel + ?Sized>(model: &M, zb: [f64; 2], e: f64, cfg: &CurveConfig) -> Result<Vec<CurvePoint>> {
    let (bounded, r_disk) = match model.a_radius(zb) {
        Some(r) => (true, r),
        None => (false, model.radius()),
    };
    if r_disk <= 0.0 {
        return Ok(Vec::new());
    }
    let Some((c, hmin)) = interior_min(model, zb, r_disk, cfg.center_grid.max(3)) else {
        return Ok(Vec::new());
    };
    if hmin > e {
        return Ok(Vec::new());
    }
    let dtheta = 2.0 * std::f64::consts::PI / cfg.angles as f64;
    let mut out = Vec::new();
    for k in 0..cfg.angles {
        let th = (k as f64 + 0.5) * dtheta;
        let v = [th.cos(), th.sin()];
        let cv = c[0] * v[0] + c[1] * v[1];
        let c2 = c[0] * c[0] + c[1] * c[1];
        let r_edge = -cv + (cv * cv - c2 + r_disk * r_disk).max(0.0).sqrt();
        let r_max = if bounded { r_edge * (1.0 - 1e-12) } else { r_edge };
        let f = |r: f64| h_a(model, [c[0] + r * v[0], c[1] + r * v[1]], zb).map(|h| h - e);
        let n = cfg.radial_steps.max(4);
        let mut prev = (0.0, hmin - e);
        for s in 1..=n {
            let r = r_max * s as f64 / n as f64;
            let Some(fr) = f(r) else { continue };
            if (prev.1 <= 0.0) != (fr <= 0.0) {
                let (mut lo, mut hi, flo) = (prev.0, r, prev.1);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    match f(mid) {
                        Some(fm) if (fm <= 0.0) == (flo <= 0.0) => lo = mid,
                        _ => hi = mid,
                    }
                }
                let root = 0.5 * (lo + hi);
                let za = [c[0] + root * v[0], c[1] + root * v[1]];
                let z = full(za, zb);
                if let Ok(g) = model.grad(&z) {
                    let ga = [g[0], g[2]];
                    let dr = (ga[0] * v[0] + ga[1] * v[1]).abs();
                    if dr > 0.0 && dr.is_finite() {
                        out.push(CurvePoint { z, grad_a: ga, weight: root * dtheta / dr });
                    }
                }
            }
            prev = (r, fr);
        }
    }
    Ok(out)
}
