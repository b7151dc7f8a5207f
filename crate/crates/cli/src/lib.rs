//! Command-line front end for the relative-entropy-of-entanglement solver.

pub mod args;
pub mod commands;
pub mod report;
pub mod state_file;

use std::process::ExitCode;

/// Exit status for runs that finished without meeting the convergence test.
pub const EXIT_NOT_CONVERGED: u8 = 3;
/// Exit status for unreadable or invalid input and bad flags.
pub const EXIT_INPUT: u8 = 2;
/// Exit status for numerical failures and I/O errors on output.
pub const EXIT_RUNTIME: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] relent_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Config(_) => EXIT_INPUT,
            CliError::Output(_) | CliError::Numerical(_) => EXIT_RUNTIME,
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    NotConverged,
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Done => ExitCode::SUCCESS,
            Outcome::NotConverged => ExitCode::from(EXIT_NOT_CONVERGED),
        }
    }
}

/// Parses arguments already split by clap and runs the chosen command.
pub fn run(cli: args::Cli) -> ExitCode {
    match commands::dispatch(cli) {
        Ok(outcome) => outcome.into(),
        Err(e) => {
            eprintln!("relent: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
