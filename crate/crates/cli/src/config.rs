//! Experiment configuration: JSON with every key optional except `kind`.
//! Unknown keys are rejected, and parse errors carry the JSON path.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use ethweyl::lmg::LmgParams;
use ethweyl::oracle1d::OracleConfig;
use ethweyl::semiclassics::{BandwidthConfig, PredictorConfig};
use ethweyl::spectral::ProfileConfig;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Oracle1d,
    BandProfile,
    SemiclassicalCompare,
    ScalingHbar,
    ScalingA,
    Bandwidth,
    WeylSymbol,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Oracle1d => "oracle1d",
            Kind::BandProfile => "band-profile",
            Kind::SemiclassicalCompare => "semiclassical-compare",
            Kind::ScalingHbar => "scaling-hbar",
            Kind::ScalingA => "scaling-a",
            Kind::Bandwidth => "bandwidth",
            Kind::WeylSymbol => "weyl-symbol",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub model: LmgParams,
    /// Master seed. When set it overrides `predictor.seed` and
    /// `bandwidth.seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Shell centre; `None` means the middle of the computed spectrum.
    #[serde(default)]
    pub energy: Option<f64>,
    /// Particle numbers for `scaling-hbar`.
    #[serde(default = "default_omegas")]
    pub omegas: Vec<u32>,
    /// Deformation values for `scaling-a`, at `model.omega`.
    #[serde(default = "default_a_values")]
    pub a_values: Vec<f64>,
    /// Operator word for `weyl-symbol`.
    #[serde(default = "default_word")]
    pub word: String,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub predictor: PredictorConfig,
    /// `semiclassical-compare` evaluates the prediction on the quantum ω-bins
    /// with `|ω|` up to this value.
    #[serde(default = "default_compare_omega_max")]
    pub compare_omega_max: f64,
    #[serde(default)]
    pub bandwidth: BandwidthConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_omegas() -> Vec<u32> {
    vec![40, 50, 60, 80, 100]
}

fn default_a_values() -> Vec<f64> {
    vec![0.6, 0.8, 1.0, 1.2, 1.4]
}

fn default_word() -> String {
    "q p q p".into()
}

fn default_compare_omega_max() -> f64 {
    3.0
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn new(kind: Kind) -> Self {
        ExperimentConfig {
            kind,
            model: LmgParams::default(),
            seed: None,
            energy: None,
            omegas: default_omegas(),
            a_values: default_a_values(),
            word: default_word(),
            profile: ProfileConfig::default(),
            predictor: PredictorConfig::default(),
            compare_omega_max: default_compare_omega_max(),
            bandwidth: BandwidthConfig::default(),
            oracle: OracleConfig::default(),
            out: default_out(),
        }
    }

    /// Parse a config. A partial `model` object is completed from the
    /// bundled parameter set.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut v: serde_json::Value = serde_json::from_str(text).context("config is not valid JSON")?;
        if let Some(m) = v.get_mut("model").and_then(|m| m.as_object_mut()) {
            let full = serde_json::to_value(LmgParams::default())?;
            for (k, d) in full.as_object().expect("params serialize to an object") {
                m.entry(k.clone()).or_insert_with(|| d.clone());
            }
        }
        serde_path_to_error::deserialize(v).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("config error at `{path}`: {}", e.into_inner())
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Apply command-line overrides, then propagate the master seed.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = Some(s);
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(w) = o.omega {
            self.model.omega = w;
        }
        if let Some(a) = o.a {
            self.model.a = a;
        }
        if let Some(e) = o.epsilon {
            self.profile.epsilon = e;
        }
        if let Some(n) = o.shell_levels {
            self.profile.shell_levels = n;
        }
        if let Some(n) = o.samples {
            self.bandwidth.n_samples = n;
        }
        if let Some(s) = self.seed {
            self.predictor.seed = s;
            self.bandwidth.seed = s;
        }
    }

    /// Range checks the JSON schema cannot express, reported by path.
    pub fn validate(&self) -> Result<()> {
        self.model.validate().context("config error at `model`")?;
        let eps = self.profile.epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            bail!("config error at `profile.epsilon`: {eps} is not in (0, 1)");
        }
        if self.profile.shell_levels < 5 {
            bail!("config error at `profile.shell_levels`: must be at least 5");
        }
        if !(self.profile.bin_spacings > 0.0) {
            bail!("config error at `profile.bin_spacings`: must be positive");
        }
        if !(self.compare_omega_max > 0.0) {
            bail!("config error at `compare_omega_max`: must be positive");
        }
        if let Some(e) = self.energy {
            if !e.is_finite() {
                bail!("config error at `energy`: not finite");
            }
        }
        match self.kind {
            Kind::ScalingHbar => {
                if self.omegas.len() < 3 {
                    bail!("config error at `omegas`: need at least 3 values for a fit");
                }
                if let Some(k) = self.omegas.iter().position(|&w| w == 0) {
                    bail!("config error at `omegas[{k}]`: particle number must be positive");
                }
            }
            Kind::ScalingA => {
                if self.a_values.len() < 3 {
                    bail!("config error at `a_values`: need at least 3 values for a fit");
                }
                if let Some(k) = self.a_values.iter().position(|a| !(*a > 0.0)) {
                    bail!("config error at `a_values[{k}]`: must be positive");
                }
            }
            Kind::WeylSymbol => {
                self.word
                    .parse::<ethweyl::weylcalc::OperatorWord>()
                    .map_err(|e| anyhow::anyhow!("config error at `word`: {e}"))?;
            }
            Kind::Bandwidth
                if (self.bandwidth.n_samples == 0 || self.bandwidth.n_width_points == 0) => {
                    bail!("config error at `bandwidth`: n_samples and n_width_points must be positive");
                }
            _ => {}
        }
        Ok(())
    }
}

/// Values given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub omega: Option<u32>,
    pub a: Option<f64>,
    pub epsilon: Option<f64>,
    pub shell_levels: Option<usize>,
    pub samples: Option<usize>,
}
