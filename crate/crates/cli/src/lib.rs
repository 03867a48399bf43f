//! Command-line front end for graph frequency domain PCA.
//!
//! Four subcommands: `simulate` runs the bundled synthetic experiments,
//! `fit` estimates a model from a graph and a signal CSV, `reconstruct`
//! applies a stored model, and `baseline` runs graph Laplacian PCA.
//!
//! Exit codes: 0 success, 1 runtime or IO failure, 2 usage or validation
//! error.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gfpca::simulation::Scenario;

pub use commands::{baseline, fit, reconstruct, simulate};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gfpca::Error),
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: gfpca::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) | CliError::File { source: e, .. } if e.is_usage() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gfpca", version, about = "Principal component analysis in the graph frequency domain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a bundled synthetic experiment and write its reports.
    Simulate(SimulateArgs),
    /// Fit a model to a signal CSV on a graph.
    Fit(FitArgs),
    /// Reconstruct a signal through a stored model.
    Reconstruct(ReconstructArgs),
    /// Graph Laplacian PCA baseline.
    Baseline(BaselineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Windowed,
    Periodogram,
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    /// Spectral estimator. `exact` is only available for simulations.
    #[arg(long, value_enum, default_value_t = EstimatorKind::Windowed)]
    pub estimator: EstimatorKind,
    /// Number of random windows M.
    #[arg(long, default_value_t = gfpca::spectral::DEFAULT_WINDOW_COUNT)]
    pub windows: usize,
    /// Variance ν of the N(1, ν) window entries.
    #[arg(long, default_value_t = gfpca::spectral::DEFAULT_WINDOW_VARIANCE)]
    pub window_variance: f64,
    /// Subtract the expected excess introduced by the windows.
    #[arg(long)]
    pub bias_correct: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    /// Fixed number of principal components.
    #[arg(long, conflicts_with_all = ["q_threshold", "elbow"])]
    pub q: Option<usize>,
    /// Smallest q whose cumulative scree reaches t.
    #[arg(long, default_value_t = gfpca::pca::DEFAULT_Q_THRESHOLD)]
    pub q_threshold: f64,
    /// Pick q at the elbow of the scree curve.
    #[arg(long)]
    pub elbow: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Edge list CSV (`src,dst,weight`, 0-based vertices).
    #[arg(long, conflicts_with = "coords", required_unless_present = "coords")]
    pub graph: Option<PathBuf>,
    /// Coordinate CSV (`id,x,y` or `id,lat,lon`); builds a Gaussian kNN graph.
    #[arg(long)]
    pub coords: Option<PathBuf>,
    /// Neighbours per vertex for `--coords`.
    #[arg(long, default_value_t = gfpca::simulation::US_SENSOR_NEIGHBORS)]
    pub knn: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Override the noise standard deviation σ.
    #[arg(long)]
    pub noise: Option<f64>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[command(flatten)]
    pub rank: RankArgs,
    #[arg(long, default_value = "gfpca-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Signal CSV: header of dimension labels, one row per vertex.
    #[arg(long)]
    pub signal: PathBuf,
    /// Apply x ↦ log(1 + x) before fitting.
    #[arg(long)]
    pub log1p: bool,
    /// Center each dimension before estimating spectra.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub center: bool,
    /// Seed for the random windows.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[command(flatten)]
    pub rank: RankArgs,
    #[arg(long, default_value = "gfpca-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    /// Model document written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub signal: PathBuf,
    /// Use fewer components than stored in the model.
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, default_value = "gfpca-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long)]
    pub log1p: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub center: bool,
    #[arg(long, default_value = "gfpca-out")]
    pub out: PathBuf,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: gfpca::Error| e.to_string())
}

/// Size the global thread pool from `GFPCA_THREADS`, if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("GFPCA_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("GFPCA_THREADS must be a positive integer, got '{v}'")))?;
    // a pool may already exist when run more than once in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Fit(a) => fit(&a),
        Command::Reconstruct(a) => reconstruct(&a),
        Command::Baseline(a) => baseline(&a),
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
