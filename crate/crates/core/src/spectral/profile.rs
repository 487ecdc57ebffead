use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Threshold-crossing rule for [`half_width`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WidthRule {
    /// Largest |ω| whose bin still reaches the threshold.
    #[default]
    Outermost,
    /// First drop below the threshold walking outward from the peak.
    Contiguous,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    /// The e-shell spans this many local level spacings.
    pub shell_levels: usize,
    /// ω-bin width in local level spacings.
    pub bin_spacings: f64,
    /// Half-range of the ω grid; `None` uses everything the spectrum allows.
    pub omega_max: Option<f64>,
    pub epsilon: f64,
    pub width_rule: WidthRule,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { shell_levels: 25, bin_spacings: 4.0, omega_max: None, epsilon: 0.5, width_rule: WidthRule::Outermost }
    }
}

/// Shell-averaged `|O_ij|²` on a symmetric ω grid. Bins without pairs hold `None`.
#[derive(Clone, Debug, Serialize)]
pub struct BandProfile {
    pub e_center: f64,
    /// Local mean level spacing at `e_center`.
    pub spacing: f64,
    pub shell_levels: usize,
    /// Pairs qualify when `|(E_i + E_j)/2 − e_center| <= shell_half_width`.
    pub shell_half_width: f64,
    pub bin_width: f64,
    pub omegas: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub counts: Vec<usize>,
    pub peak: f64,
    pub peak_omega: f64,
    pub epsilon: f64,
    pub half_width: Option<f64>,
    /// Mean `|O_ij|²` over every off-diagonal pair in the shell, binned or not.
    pub mean_offdiag: f64,
    pub shell_pairs: usize,
}

impl BandProfile {
    /// Index of the bin containing `omega`, if on the grid.
    pub fn bin_of(&self, omega: f64) -> Option<usize> {
        let nb = (self.omegas.len() / 2) as i64;
        let k = bin_offset(omega, self.bin_width);
        if k.abs() > nb {
            return None;
        }
        Some((k + nb) as usize)
    }

    pub fn central_index(&self) -> usize {
        self.omegas.len() / 2
    }
}

/// Signed bin offset, rounded on |ω| so that ω and −ω land symmetrically.
fn bin_offset(omega: f64, width: f64) -> i64 {
    let k = (omega.abs() / width).round() as i64;
    if omega < 0.0 {
        -k
    } else {
        k
    }
}

fn local_spacing(levels: &[f64], c: usize, half: usize) -> f64 {
    let lo = c.saturating_sub(half);
    let hi = (c + half).min(levels.len() - 1);
    (levels[hi] - levels[lo]) / (hi - lo) as f64
}

struct ShellGeometry {
    spacing: f64,
    half: f64,
    bin_width: f64,
    nb: usize,
}

fn geometry(levels: &[f64], e_center: f64, cfg: &ProfileConfig) -> Result<ShellGeometry> {
    let n = levels.len();
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    if cfg.shell_levels < 5 {
        return Err(Error::InvalidArgument("shell_levels must be at least 5".into()));
    }
    if !(cfg.bin_spacings > 0.0) || !(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0) {
        return Err(Error::InvalidArgument("bin_spacings > 0 and epsilon in (0, 1] required".into()));
    }
    let c = levels.partition_point(|&x| x < e_center);
    if c < cfg.shell_levels || n - c < cfg.shell_levels {
        return Err(Error::EdgeProximity(format!(
            "e = {e_center} has {c} levels below and {} above; need {}",
            n - c,
            cfg.shell_levels
        )));
    }
    let spacing = local_spacing(levels, c, cfg.shell_levels);
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument("degenerate levels around e_center".into()));
    }
    let half = 0.5 * cfg.shell_levels as f64 * spacing;
    let bin_width = cfg.bin_spacings * spacing;
    let avail = 2.0 * (e_center - levels[0]).min(levels[n - 1] - e_center);
    let omax = cfg.omega_max.unwrap_or(avail).min(avail.max(bin_width));
    let nb = ((omax / bin_width) - 0.5).floor().max(0.0) as usize;
    Ok(ShellGeometry { spacing, half, bin_width, nb })
}

/// Visit every ordered pair `i != j` whose mean energy lies in the shell.
fn for_shell_pairs<F>(levels: &[f64], e: f64, half: f64, i: usize, mut f: F)
where
    F: FnMut(usize),
{
    let lo_e = 2.0 * (e - half) - levels[i];
    let hi_e = 2.0 * (e + half) - levels[i];
    // widen the search slightly, then apply the exact (symmetric) test
    let slack = 1e-12 * (1.0 + e.abs() + half);
    let lo = levels.partition_point(|&x| x < lo_e - slack);
    let hi = levels.partition_point(|&x| x <= hi_e + slack);
    for j in lo..hi {
        if j != i && (0.5 * (levels[i] + levels[j]) - e).abs() <= half {
            f(j);
        }
    }
}

const CHUNK: usize = 64;

/// Shell-averaged squared matrix elements against `ω = E_i − E_j`.
///
/// `levels` must be ascending and index the rows of `o`.
pub fn band_profile(o: &Mat<f64>, levels: &[f64], e_center: f64, cfg: &ProfileConfig) -> Result<BandProfile> {
    let n = levels.len();
    if o.nrows() != n || o.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: o.nrows() });
    }
    let g = geometry(levels, e_center, cfg)?;
    let nbins = 2 * g.nb + 1;
    let nchunks = n.div_ceil(CHUNK);
    let parts = par::map_range(nchunks, |c| {
        let mut sums = vec![0.0f64; nbins];
        let mut counts = vec![0usize; nbins];
        let (mut tot, mut tot_n) = (0.0f64, 0usize);
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            for_shell_pairs(levels, e_center, g.half, i, |j| {
                let v = o[(i, j)] * o[(i, j)];
                tot += v;
                tot_n += 1;
                let k = bin_offset(levels[i] - levels[j], g.bin_width) + g.nb as i64;
                if k >= 0 && (k as usize) < nbins {
                    sums[k as usize] += v;
                    counts[k as usize] += 1;
                }
            });
        }
        (sums, counts, tot, tot_n)
    });
    let mut sums = vec![0.0f64; nbins];
    let mut counts = vec![0usize; nbins];
    let (mut tot, mut tot_n) = (0.0f64, 0usize);
    for (s, c, t, tn) in parts {
        for k in 0..nbins {
            sums[k] += s[k];
            counts[k] += c[k];
        }
        tot += t;
        tot_n += tn;
    }
    let values: Vec<Option<f64>> =
        sums.iter().zip(&counts).map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None }).collect();
    let omegas: Vec<f64> = (0..nbins).map(|k| (k as f64 - g.nb as f64) * g.bin_width).collect();
    let (pk, peak) = values
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .fold((usize::MAX, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    if pk == usize::MAX {
        return Err(Error::EmptyProfile);
    }
    let mut prof = BandProfile {
        e_center,
        spacing: g.spacing,
        shell_levels: cfg.shell_levels,
        shell_half_width: g.half,
        bin_width: g.bin_width,
        omegas,
        values,
        counts,
        peak,
        peak_omega: (pk as f64 - g.nb as f64) * g.bin_width,
        epsilon: cfg.epsilon,
        half_width: None,
        mean_offdiag: if tot_n > 0 { tot / tot_n as f64 } else { 0.0 },
        shell_pairs: tot_n,
    };
    prof.half_width = half_width(&prof, cfg.epsilon, cfg.width_rule).ok();
    Ok(prof)
}

fn crossing(w0: f64, v0: f64, w1: f64, v1: f64, thr: f64) -> f64 {
    if v1 == v0 {
        return w0;
    }
    w0 + (thr - v0) / (v1 - v0) * (w1 - w0)
}

fn side_width(pts: &[(f64, f64)], thr: f64, rule: WidthRule) -> f64 {
    // pts runs outward from the peak (first entry is the peak).
    let last = match rule {
        WidthRule::Outermost => pts.iter().rposition(|&(_, v)| v >= thr).unwrap_or(0),
        WidthRule::Contiguous => pts.iter().position(|&(_, v)| v < thr).map(|k| k - 1).unwrap_or(pts.len() - 1),
    };
    let (w0, v0) = pts[last];
    match pts.get(last + 1) {
        Some(&(w1, v1)) => crossing(w0, v0, w1, v1, thr).abs(),
        None => w0.abs(),
    }
}

/// Symmetrised half-width of the profile at `ε·peak`, with linear
/// interpolation between neighbouring populated bins.
pub fn half_width(profile: &BandProfile, epsilon: f64, rule: WidthRule) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in (0, 1]")));
    }
    let pts: Vec<(f64, f64)> =
        profile.omegas.iter().zip(&profile.values).filter_map(|(&w, v)| v.map(|v| (w, v))).collect();
    if pts.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let (pk, peak) = pts.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (k, &(_, v))| if v > a.1 { (k, v) } else { a });
    let min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if min == peak {
        return Err(Error::InvalidArgument("profile is flat".into()));
    }
    if pk == 0 || pk == pts.len() - 1 {
        return Err(Error::InvalidArgument("profile peak is not interior".into()));
    }
    let thr = epsilon * peak;
    let right: Vec<(f64, f64)> = pts[pk..].to_vec();
    let left: Vec<(f64, f64)> = pts[..=pk].iter().rev().copied().collect();
    Ok(0.5 * (side_width(&right, thr, rule) + side_width(&left, thr, rule)))
}

/// ETH envelope `f(e, ω) = √(ρ(e) · ⟨|O_ij|²⟩)` per bin.
pub fn eth_f_function(profile: &BandProfile, rho_e: f64) -> Vec<Option<f64>> {
    profile.values.iter().map(|v| v.map(|v| (rho_e * v).sqrt())).collect()
}

/// Running mean of the diagonal elements over `|E_k − E_i| <= window/2`.
pub fn diagonal_profile(o: &Mat<f64>, levels: &[f64], window: f64) -> Result<Vec<f64>> {
    let n = levels.len();
    if o.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: o.nrows() });
    }
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] + o[(k, k)];
    }
    Ok((0..n)
        .map(|i| {
            let lo = levels.partition_point(|&x| x < levels[i] - 0.5 * window);
            let hi = levels.partition_point(|&x| x <= levels[i] + 0.5 * window);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RMoments {
    pub mean: f64,
    pub variance: f64,
    pub excess_kurtosis: f64,
    pub samples: usize,
}

/// Moments of `r_ij = O_ij / √⟨|O_ij|²⟩_bin` over shell pairs `i < j` in bins
/// holding at least `min_count` pairs.
pub fn r_moments(o: &Mat<f64>, levels: &[f64], profile: &BandProfile, min_count: usize) -> Result<RMoments> {
    let n = levels.len();
    if o.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: o.nrows() });
    }
    let mut rs = Vec::new();
    for i in 0..n {
        for_shell_pairs(levels, profile.e_center, profile.shell_half_width, i, |j| {
            if j <= i {
                return;
            }
            let Some(k) = profile.bin_of(levels[i] - levels[j]) else { return };
            if profile.counts[k] < min_count {
                return;
            }
            if let Some(v) = profile.values[k] {
                if v > 0.0 {
                    rs.push(o[(i, j)] / v.sqrt());
                }
            }
        });
    }
    if rs.len() < min_count.max(2) {
        return Err(Error::InsufficientStatistics(format!("{} samples", rs.len())));
    }
    let m = rs.len() as f64;
    let mean = rs.iter().sum::<f64>() / m;
    let m2 = rs.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / m;
    let m4 = rs.iter().map(|r| (r - mean).powi(4)).sum::<f64>() / m;
    let excess_kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { f64::NAN };
    Ok(RMoments { mean, variance: m2, excess_kurtosis, samples: rs.len() })
}
