//! Run configuration embedded in every output artifact for provenance.

use serde::{Deserialize, Serialize};

use crate::ising::RangeSpec;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reproducibility envelope: seed, ranges and simulator constants. Written
/// into every output file; re-running from an embedded config reproduces the
/// artifact byte-for-byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub ranges: RangeSpec,
    pub chain_strength: f64,
    pub sweeps_per_us: f64,
    pub temperature_kappa: f64,
    pub temperature_s_floor: f64,
    pub tool_version: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            ranges: RangeSpec::pegasus(),
            chain_strength: 2.0,
            sweeps_per_us: 10.0,
            temperature_kappa: 1.0,
            temperature_s_floor: 0.05,
            tool_version: TOOL_VERSION.to_string(),
        }
    }
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        RunConfig { seed, ..Default::default() }
    }
}
