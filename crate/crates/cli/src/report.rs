//! JSON reports and CSV traces.

use relent_core::{ConvergenceTrace, IterationConfig, ReeResult, WitnessOperator};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub alpha: f64,
    pub max_iters: usize,
    pub tol_entropy: f64,
    pub tol_residual: f64,
    pub sep_threshold: f64,
    pub ensemble_size: usize,
    pub seed: u64,
    pub starts: usize,
    pub backtracking: bool,
}

impl ConfigEcho {
    pub fn new(cfg: &IterationConfig, dims: relent_core::Dims) -> Self {
        Self {
            alpha: cfg.alpha,
            max_iters: cfg.max_iters,
            tol_entropy: cfg.tol_entropy,
            tol_residual: cfg.tol_residual,
            sep_threshold: cfg.sep_threshold,
            ensemble_size: cfg.ensemble_size_for(dims),
            seed: cfg.seed,
            starts: cfg.starts,
            backtracking: cfg.backtracking,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReeReport {
    pub input_sha256: String,
    pub dims: [usize; 2],
    pub config: ConfigEcho,
    pub entanglement_nats: f64,
    pub entanglement_bits: f64,
    /// `"nats"` or `"bits"`; selects `entanglement`.
    pub unit: &'static str,
    pub entanglement: f64,
    pub verdict: String,
    pub termination: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    /// `Tr(W σ)` for `W = 1 − A`; negative certifies entanglement.
    pub witness_expectation: f64,
    pub start_seed: u64,
    pub collapse_restarts: usize,
    pub wall_time_seconds: f64,
}

impl ReeReport {
    pub fn new(
        res: &ReeResult,
        w: &WitnessOperator,
        sigma: &relent_core::DensityMatrix,
        cfg: &IterationConfig,
        input: &[u8],
        bits: bool,
        wall_time_seconds: f64,
    ) -> Self {
        let dims = sigma.dims();
        let nats = res.entanglement;
        let in_bits = nats / std::f64::consts::LN_2;
        Self {
            input_sha256: sha256_hex(input),
            dims: [dims.d1, dims.d2],
            config: ConfigEcho::new(cfg, dims),
            entanglement_nats: nats,
            entanglement_bits: in_bits,
            unit: if bits { "bits" } else { "nats" },
            entanglement: if bits { in_bits } else { nats },
            verdict: res.verdict.to_string(),
            termination: res.termination.to_string(),
            converged: res.converged(),
            iterations: res.iterations(),
            final_residual: res.final_residual(),
            witness_expectation: w.expectation(sigma),
            start_seed: res.start_seed,
            collapse_restarts: res.collapse_restarts,
            wall_time_seconds,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub input_sha256: String,
    pub dims: [usize; 2],
    pub config: ConfigEcho,
    pub entanglement_nats: f64,
    pub verdict: String,
    pub termination: String,
    pub converged: bool,
    /// False when the input was judged separable; W then detects nothing.
    pub certifying: bool,
    /// `Tr(W σ)` on the input.
    pub expectation_input: f64,
    /// `Tr(W ρ*)` on the closest separable state; zero at the optimum.
    pub expectation_closest: f64,
    pub separable_min: f64,
    pub separable_states_checked: usize,
    pub separable_passed: bool,
    pub product_min: f64,
    pub wall_time_seconds: f64,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    s_nats: f64,
    delta_s: f64,
    alpha_used: f64,
    max_residual: f64,
    restarted: bool,
}

pub fn trace_csv(trace: &ConvergenceTrace) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &trace.records {
        w.serialize(TraceRow {
            iteration: r.iter,
            s_nats: r.s_value,
            delta_s: r.delta_s,
            alpha_used: r.alpha_used,
            max_residual: r.max_residual,
            restarted: r.restarted,
        })
        .map_err(|e| CliError::Output(e.to_string()))?;
    }
    finish_csv(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRow {
    pub series_label: String,
    pub iteration: usize,
    #[serde(rename = "S_nats")]
    pub s_nats: f64,
    pub precision_digits: f64,
}

pub fn figure_csv(rows: &[FigureRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}
