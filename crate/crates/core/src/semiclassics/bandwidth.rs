use serde::{Deserialize, Serialize};

use super::shell::{mean_and_stderr, mean_grad_norm, sample_shell, Restrict};
use super::{Estimate, SplitModel};
use crate::error::{Error, Result};
use crate::jfunc::{Bound, Domain, JTilde, Region, RegionOptions};
use crate::par;
use crate::weylcalc::{classical_limit, Monomial, PhasePolynomial};

/// Square box standing in for the A-disk of radius `R` when a rectangular
/// domain is needed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoxRule {
    /// Half-side `R/√2`.
    Inscribed,
    /// Half-side `R√π/2`: same area as the disk.
    #[default]
    EqualArea,
    /// Half-side `R`.
    Bounding,
}

impl BoxRule {
    pub fn half_side(self, r: f64) -> f64 {
        match self {
            BoxRule::Inscribed => r * std::f64::consts::FRAC_1_SQRT_2,
            BoxRule::EqualArea => r * std::f64::consts::PI.sqrt() / 2.0,
            BoxRule::Bounding => r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandwidthConfig {
    /// Shell thickness.
    pub delta_e: f64,
    /// Shell points used for `⟨|∇_A H|⟩`.
    pub n_samples: usize,
    /// Shell points (a prefix of the sample) used for region widths.
    pub n_width_points: usize,
    /// Random directions per width average.
    pub n_directions: usize,
    pub box_rule: BoxRule,
    pub region: RegionOptions,
    pub seed: u64,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        BandwidthConfig {
            delta_e: 0.4,
            n_samples: 20_000,
            n_width_points: 96,
            n_directions: 32,
            box_rule: BoxRule::EqualArea,
            region: RegionOptions { rays: 96, ..RegionOptions::default() },
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BandwidthEstimate {
    pub hbar: f64,
    pub epsilon: f64,
    /// `½ħ⟨|∇_A H|⟩⟨δ_ε J̃_A⟩`.
    pub w_b: Estimate,
    pub grad_norm: Estimate,
    /// Which gradient enters; the estimate has no B-gradient factor.
    pub restrict: Restrict,
    pub width: Estimate,
    /// Width points skipped because they fell outside the box or their
    /// region was not closed within the scan reach.
    pub skipped: usize,
}

fn a_symbol(o_cl: &PhasePolynomial) -> Result<PhasePolynomial> {
    let o = classical_limit(o_cl).0;
    let terms: Result<Vec<_>> = o
        .terms()
        .map(|(m, c)| {
            if m.p.iter().skip(1).chain(m.q.iter().skip(1)).any(|&e| e > 0) {
                return Err(Error::InvalidArgument("observable must act on subsystem A (mode 1) only".into()));
            }
            Ok((Monomial { p: vec![m.p[0]], q: vec![m.q[0]], hbar: 0 }, *c))
        })
        .collect();
    Ok(PhasePolynomial::from_terms(1, terms?))
}

/// Subsystem bandwidth `w_b = ½ħ⟨|∇_A H|⟩⟨δ_ε J̃_A⟩` on the shell at `e`.
///
/// The gradient average runs over the full shell sample. Widths of the
/// `ε`-region of `J̃_A` are averaged over the first `n_width_points` shell
/// points, each on the square A-domain that `box_rule` assigns to its
/// `z_B`; point `k` draws its directions from seed `seed + k`. Nothing here
/// depends on ħ except the prefactor.
pub fn bandwidth_estimate<M: SplitModel + ?Sized>(
    model: &M,
    o_cl: &PhasePolynomial,
    e: f64,
    hbar: f64,
    epsilon: f64,
    cfg: &BandwidthConfig,
) -> Result<BandwidthEstimate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in (0, 1)")));
    }
    if !(hbar > 0.0) {
        return Err(Error::InvalidArgument(format!("ħ must be positive, got {hbar}")));
    }
    let o = a_symbol(o_cl)?;
    let sample = sample_shell(model, e, cfg.delta_e, cfg.n_samples, cfg.seed)?;
    let grad = mean_grad_norm(&sample, model, Restrict::SubsystemA)?;
    let pts = &sample.points[..cfg.n_width_points.min(sample.points.len())];
    let idx: Vec<usize> = (0..pts.len()).collect();
    let widths: Vec<Result<Option<f64>>> = par::map_slice(&idx, |&k| {
        let z = &pts[k];
        let r = model.a_radius([z[1], z[3]]).ok_or_else(|| Error::InvalidArgument("subsystem A is unbounded".into()))?;
        let s = cfg.box_rule.half_side(r);
        if z[0].abs() >= s || z[2].abs() >= s {
            return Ok(None);
        }
        let domain = Domain { p: vec![Bound::Interval(-s, s)], q: vec![Bound::Interval(-s, s)] };
        let jt = JTilde::new(&o, &[z[0], z[2]], domain)?;
        let width = Region::new(&jt, epsilon, cfg.region.clone())
            .and_then(|r| r.mean_width(cfg.n_directions, cfg.seed.wrapping_add(k as u64)));
        match width {
            Ok(ev) => Ok(Some(ev.mean)),
            // Where O nearly vanishes the ε-region can reach past the scan.
            Err(Error::UnboundedRegion(_)) => Ok(None),
            Err(e) => Err(e),
        }
    });
    let widths: Vec<Option<f64>> = widths.into_iter().collect::<Result<_>>()?;
    let skipped = widths.iter().filter(|w| w.is_none()).count();
    let good: Vec<f64> = widths.into_iter().flatten().collect();
    if good.len() < 2 {
        return Err(Error::InsufficientStatistics(format!("{} usable width points", good.len())));
    }
    let width = mean_and_stderr(&good);
    let value = 0.5 * hbar * grad.value * width.value;
    let rel = ((grad.stderr / grad.value).powi(2) + (width.stderr / width.value).powi(2)).sqrt();
    Ok(BandwidthEstimate {
        hbar,
        epsilon,
        w_b: Estimate { value, stderr: value * rel },
        grad_norm: grad,
        restrict: Restrict::SubsystemA,
        width,
        skipped,
    })
}
