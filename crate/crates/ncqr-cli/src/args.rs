//! Argument definitions. Flags mirror the config-file keys; a flag given on
//! the command line always wins over the file.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "ncqr",
    version,
    about = "Non-crossing Bayesian quantile regression",
    long_about = "Fits separate Bayesian quantile regressions across a grid of levels, then \
                  smooths them into a single non-crossing quantile surface."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one MCMC quantile regression per grid level and persist the draws,
    /// the induced-moment artifacts, and the unadjusted surface.
    Fit(FitArgs),
    /// Smooth persisted fit artifacts into a non-crossing surface, searching
    /// for the smallest workable bandwidth unless one is fixed.
    Adjust(AdjustArgs),
    /// Generate data from a built-in design, run the full pipeline on each
    /// replicate, and score both estimators against the known truth.
    Simulate(SimulateArgs),
    /// Re-check an emitted surface CSV: crossing violations and, when the
    /// generating design is known, accuracy against the truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Parser)]
pub struct FitArgs {
    /// Input CSV with a header row; the response is the final column unless
    /// --response names another.
    pub data: PathBuf,

    /// Flat JSON config file; command-line flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Base RNG seed. Per-level chains derive their own seeds from it.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Quantile levels: "start:step:stop" or a comma list like "0.25,0.5,0.75".
    #[arg(long)]
    pub grid: Option<String>,

    /// Basis expansion: "linear", "poly:D", or "spline:K" (K interior knots).
    #[arg(long)]
    pub basis: Option<String>,

    /// Name of the response column.
    #[arg(long)]
    pub response: Option<String>,

    /// Output directory; created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
pub struct AdjustArgs {
    /// Directory holding the artifacts a `fit` run wrote.
    pub artifacts: PathBuf,

    /// Flat JSON config file; command-line flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Expected quantile grid; it is an error if the artifacts disagree.
    #[arg(long)]
    pub grid: Option<String>,

    /// Adjustment weighting: "gpr" (per-point noise) or "lgpr" (noise
    /// averaged over points, which preserves affine fits).
    #[arg(long)]
    pub mode: Option<String>,

    /// Skip the bandwidth search and use this value as-is.
    #[arg(long)]
    pub fixed_b: Option<f64>,

    /// Output directory; created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
pub struct SimulateArgs {
    /// Built-in design id, 1 through 6.
    #[arg(long)]
    pub design: Option<u32>,

    /// Number of independent replicates.
    #[arg(long)]
    pub replicates: Option<usize>,

    /// Observations per replicate.
    #[arg(long)]
    pub n: Option<usize>,

    /// Flat JSON config file; command-line flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Base RNG seed; replicate r uses a seed derived from (seed, r).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Quantile levels: "start:step:stop" or a comma list.
    #[arg(long)]
    pub grid: Option<String>,

    /// Basis expansion: "linear", "poly:D", or "spline:K".
    #[arg(long)]
    pub basis: Option<String>,

    /// Adjustment weighting: "gpr" or "lgpr".
    #[arg(long)]
    pub mode: Option<String>,

    /// Skip the bandwidth search and use this value for every replicate.
    #[arg(long)]
    pub fixed_b: Option<f64>,

    /// Also write each replicate's generated dataset as a CSV.
    #[arg(long)]
    pub emit_data: bool,

    /// Output directory; created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
pub struct EvaluateArgs {
    /// Surface CSV emitted by `fit`, `adjust`, or `simulate`.
    pub surface: PathBuf,

    /// Crossing tolerance: adjacent levels may invert by at most this much.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    /// Built-in design id; with --data, enables accuracy scoring.
    #[arg(long)]
    pub design: Option<u32>,

    /// Dataset CSV the surface was fitted on (for truth evaluation).
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Directory for evaluation.json; without it the report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
