//! Machine-readable report files: every analysis command writes one JSON
//! document carrying the command echo, tool version, wall-clock time, and
//! the command-specific payload.

use std::time::Duration;

use serde::Serialize;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct ReportFile<T: Serialize> {
    pub schema_version: u32,
    pub tool: ToolInfo,
    /// The argv the report was produced by, for re-runs.
    pub command: Vec<String>,
    pub wall_ms: f64,
    pub payload: T,
}

impl<T: Serialize> ReportFile<T> {
    pub fn new(payload: T, elapsed: Duration) -> Self {
        ReportFile {
            schema_version: REPORT_SCHEMA_VERSION,
            tool: ToolInfo { name: "hpds", version: env!("CARGO_PKG_VERSION") },
            command: std::env::args().collect(),
            wall_ms: elapsed.as_secs_f64() * 1e3,
            payload,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report types serialize");
        out.push(b'\n');
        out
    }
}

#[derive(Debug, Serialize)]
pub struct ReductionPayload {
    pub r: usize,
    pub r_k: usize,
    pub sigma: Vec<f64>,
    pub sigma_last: Vec<f64>,
    pub residual: f64,
    pub exact: bool,
    pub params_before: u128,
    pub params_after: u128,
}

#[derive(Debug, Serialize)]
pub struct StabilityPayload {
    pub classification: String,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub terms: Vec<f64>,
    pub origin_unique: bool,
    pub zeroed_terms: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct ControllabilityPayload {
    pub rank: usize,
    pub state_dim: usize,
    pub levels_used: usize,
    pub rank_tol: f64,
    pub strongly_controllable: bool,
    pub truncated_by_cap: bool,
}

#[derive(Debug, Serialize)]
pub struct ObservabilityPayload {
    pub rank: usize,
    pub state_dim: usize,
    pub levels_used: usize,
    pub rank_tol: f64,
    pub verdict: String,
}

#[derive(Debug, Serialize)]
pub struct ComparePayload {
    pub max_state_error: f64,
    pub final_state_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_output_error: Option<f64>,
    pub compared_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_diverged_at: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_diverged_at: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct InfoPayload {
    pub state_dim: usize,
    pub order: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    pub degree: usize,
    pub param_count: u128,
    pub frobenius_norm: f64,
    pub almost_symmetric_deviation: f64,
    pub symmetric_deviation: f64,
    pub has_projection: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata_name: Option<String>,
}
