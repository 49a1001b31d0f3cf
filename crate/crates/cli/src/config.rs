//! Resolved run configuration.
//!
//! Every command materializes all defaults into a `ResolvedConfig` and
//! echoes it to `resolved_config.json`, so a run can be reproduced exactly
//! from its output directory. A partial configuration can be preloaded from
//! a JSON file via `--config`; explicit flags override file values.

use bdwell::io::ModelDocument;
use bdwell::zoo::ModelParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    /// cut-off profile grid: c = 0, c_step, .., c_max
    pub c_max: f64,
    pub c_step: f64,
    /// significance level for KS verdicts
    pub alpha: f64,
    /// acceptance ceiling for exact-law escape distances
    pub escape_ks_max: f64,
    /// ceiling on the final sweep value for a "tends to zero" verdict
    pub trend_final_max: f64,
    /// dense-oracle budgets
    pub oracle_states: usize,
    pub oracle_steps: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            c_max: 3.0,
            c_step: 0.05,
            alpha: 0.01,
            escape_ks_max: 0.05,
            trend_final_max: 0.5,
            oracle_states: 65,
            oracle_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub command: String,
    pub model: ModelDocument,
    /// sweep points; single-`a` commands store `[a]`
    pub a_list: Vec<i64>,
    /// textual query list, e.g. `"hit a:0"`, `"last-exit 0:a"`
    pub queries: Vec<String>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub stream: u64,
    pub workers: Option<usize>,
    pub step_mode: String,
    pub allow_censoring: bool,
    pub escape: bool,
    pub thresholds: Thresholds,
    pub out_dir: String,
}

/// Partial configuration file: any subset of the resolved fields.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<String>,
    pub spec: Option<String>,
    pub a: Option<i64>,
    pub b: Option<i64>,
    pub a_list: Option<Vec<i64>>,
    pub params: Option<ModelParams>,
    pub queries: Option<Vec<String>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub workers: Option<usize>,
    pub step_mode: Option<String>,
    pub allow_censoring: Option<bool>,
    pub escape: Option<bool>,
    pub thresholds: Option<Thresholds>,
    pub out: Option<String>,
}

/// Pick the output directory: flag, then `BDWELL_OUT`, then `./bdwell_out`.
/// The environment variable is the only one the tool reads.
pub fn resolve_out_dir(flag: Option<String>, file: Option<String>) -> String {
    flag.or(file)
        .or_else(|| std::env::var("BDWELL_OUT").ok())
        .unwrap_or_else(|| "bdwell_out".to_string())
}
