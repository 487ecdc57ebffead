//! Config-driven experiment runner: each run writes CSVs, JSON summaries,
//! gnuplot scripts and a manifest that is enough to repeat it exactly.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod plot;

pub use config::{ExperimentConfig, Kind, Overrides};
pub use manifest::{Check, Manifest};

/// JSON Schema of the experiment config.
pub const CONFIG_SCHEMA: &str = include_str!("../config/experiment.schema.json");

/// Resolve, validate and run `cfg`, writing artifacts and `manifest.json`.
pub fn execute(cfg: &ExperimentConfig, workers: usize) -> anyhow::Result<Manifest> {
    cfg.validate()?;
    let mut out = pipeline::Bundle::new(&cfg.out)?;
    let checks = pipeline::run(cfg, &mut out)?;
    let mut outputs = out.files.clone();
    outputs.push("manifest.json".into());
    let m = Manifest::new(cfg, workers, outputs, checks);
    let mut s = serde_json::to_string_pretty(&m)?;
    s.push('\n');
    std::fs::write(out.path("manifest.json"), s)?;
    Ok(m)
}
