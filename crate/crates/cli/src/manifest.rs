//! Run manifest: the resolved config, its hash and what the run produced.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub kind: String,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub parallel: bool,
    pub workers: usize,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub success: bool,
    /// Seconds since the Unix epoch. The only field that differs between reruns.
    pub timestamp: u64,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    format!("{:x}", Sha256::digest(&bytes))
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, workers: usize, outputs: Vec<String>, checks: Vec<Check>) -> Self {
        let success = checks.iter().all(|c| c.pass);
        Manifest {
            schema_version: MANIFEST_SCHEMA,
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            kind: cfg.kind.name().into(),
            config_hash: config_hash(cfg),
            config: cfg.clone(),
            parallel: ethweyl::par::is_parallel(),
            workers,
            outputs,
            checks,
            success,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }
}
