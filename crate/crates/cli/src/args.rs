//! Argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relent_core::IterationConfig;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "relent",
    version,
    about = "Relative entropy of entanglement by regularized fixed-point iteration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute E(σ), the closest separable state and the verdict.
    Ree(ReeArgs),
    /// Write a test state to a JSON state file.
    Gen(GenArgs),
    /// Build W = 1 − A for a state and check it on separable states.
    Witness(WitnessArgs),
    /// Produce convergence-trace CSVs for the benchmark series.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Regularization strength (cap for adaptive growth).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long = "max-iter", default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long = "tol-entropy", default_value_t = 1e-12)]
    pub tol_entropy: f64,
    #[arg(long = "tol-residual", default_value_t = 1e-8)]
    pub tol_residual: f64,
    /// E (nats) below which the state is reported separable.
    #[arg(long = "sep-threshold", default_value_t = 1e-7)]
    pub sep_threshold: f64,
    /// Product-ensemble size; defaults to (d1·d2)².
    #[arg(long = "ensemble-size")]
    pub ensemble_size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Independent random starts; the lowest entropy wins.
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// Disable step halving (restart on rank collapse instead).
    #[arg(long = "no-backtracking")]
    pub no_backtracking: bool,
}

impl SolverArgs {
    pub fn config(&self) -> Result<IterationConfig, CliError> {
        let cfg = IterationConfig {
            alpha: self.alpha,
            max_iters: self.max_iter,
            tol_entropy: self.tol_entropy,
            tol_residual: self.tol_residual,
            sep_threshold: self.sep_threshold,
            ensemble_size: self.ensemble_size,
            seed: self.seed,
            backtracking: !self.no_backtracking,
            starts: self.restarts,
            ..IterationConfig::default()
        };
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct ReeArgs {
    /// JSON state file.
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Report path; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration CSV trace.
    #[arg(long = "trace-out")]
    pub trace_out: Option<PathBuf>,
    /// Write the witness operator W = 1 − A as a JSON matrix file.
    #[arg(long = "witness-out")]
    pub witness_out: Option<PathBuf>,
    /// Display the entanglement in bits (both units are always in the report).
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Werner,
    Separable,
    Npt,
    PureRandom,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Local dimension for Werner states.
    #[arg(long)]
    pub d: Option<usize>,
    /// Werner parameter f = Tr(ρF) in [-1, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub f: Option<f64>,
    /// Local dimensions d1 d2 for random states.
    #[arg(long, num_args = 2, value_names = ["D1", "D2"])]
    pub dims: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output path; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Random separable states used to check Tr(Wρ) ≥ 0.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Random starts for the product-vector minimization.
    #[arg(long = "product-restarts", default_value_t = relent_core::DEFAULT_PRODUCT_RESTARTS)]
    pub product_restarts: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the witness operator as a JSON matrix file.
    #[arg(long = "witness-out")]
    pub witness_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureKind {
    /// Random separable 2⊗2 states; reference E = 0.
    Fig2,
    /// Werner states at d = 4 with negative f; reference from the closed form.
    Fig3,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub kind: FigureKind,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV path; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
