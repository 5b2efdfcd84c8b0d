//! Command surface for the two-stage quantile regression pipeline.
//!
//! The binary wires four subcommands around `ncqr-core`: `fit` runs the
//! per-level MCMC and persists draws plus induced-moment artifacts, `adjust`
//! turns those artifacts into a non-crossing surface, `simulate` scores the
//! whole pipeline on built-in designs with known truth, and `evaluate`
//! re-checks an emitted surface from its CSV alone.
//!
//! Everything a command writes is reproducible from (config, seed): re-runs
//! produce byte-identical CSVs. Floats are serialized with 17 significant
//! digits so parsing them back yields the exact same doubles.

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod table;

use ncqr_core::Error as CoreError;

/// CLI-level error, partitioned by exit code: configuration problems exit
/// with 2, unusable data with 3, numerical failures with 4.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Config(_) | CoreError::Domain(_) | CoreError::Shape { .. } => {
                CliError::Config(err.to_string())
            }
            CoreError::Data(_) => CliError::Data(err.to_string()),
            CoreError::Fit(_) | CoreError::Numerical(_) => CliError::Numerical(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn run(cli: args::Cli) -> CliResult<()> {
    match cli.command {
        args::Command::Fit(a) => commands::fit::run(&a),
        args::Command::Adjust(a) => commands::adjust::run(&a),
        args::Command::Simulate(a) => commands::simulate::run(&a),
        args::Command::Evaluate(a) => commands::evaluate::run(&a),
    }
}
