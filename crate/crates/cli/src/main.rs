//! `gptcca`: generating-polynomial CP decompositions, an ALS baseline and
//! tensor canonical correlation analysis from the command line.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 rank or shape
//! contract violation, 4 numerical failure.

mod commands;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "gptcca", version, about)]
struct Cli {
    /// Include wall-clock timings in reports. Off by default so that
    /// outputs are byte-identical across runs; timings then go to stderr.
    #[arg(long, global = true)]
    timings: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank-r CP decomposition of a binary tensor file.
    Decompose(DecomposeArgs),
    /// Generate planted synthetic data.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
    /// Fit a TCCA model on per-view CSV feature files.
    TccaFit(TccaFitArgs),
    /// Project views with a fitted TCCA model.
    TccaTransform(TccaTransformArgs),
    /// Compare GP, GP+refine and best-of-k ALS on planted tensors.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Gp,
    Als,
    #[value(name = "gp+refine")]
    GpRefine,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gp => "gp",
            Method::Als => "als",
            Method::GpRefine => "gp+refine",
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Maximum ALS sweeps.
    #[arg(long, default_value_t = 500)]
    pub max_sweeps: usize,
    /// Stop when the relative change of the residual falls below this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Tensor in the binary TNSR format.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub rank: usize,
    #[arg(long, value_enum, default_value_t = Method::GpRefine)]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix for `<out>.mode<j>.csv`, `<out>.weights.csv` and
    /// `<out>.report.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Subcommand)]
enum SynthKind {
    /// Planted low-rank tensor plus relative Gaussian noise.
    Tensor(SynthTensorArgs),
    /// Planted latent-class multi-view dataset.
    Multiview(SynthMultiviewArgs),
}

#[derive(Debug, Args)]
pub struct SynthTensorArgs {
    /// Dimensions joined by `x`, e.g. `5x4x3`.
    #[arg(long)]
    pub shape: String,
    #[arg(long)]
    pub rank: usize,
    /// Noise norm relative to the norm of the planted tensor.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthMultiviewArgs {
    /// View dimensions joined by `x`, e.g. `12x10x8`.
    #[arg(long)]
    pub shape: String,
    #[arg(long)]
    pub samples: usize,
    #[arg(long)]
    pub rank: usize,
    /// Standard deviation of the additive per-feature noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TccaFitArgs {
    /// One headerless CSV per view; rows are samples.
    #[arg(long, num_args = 2.., required = true)]
    pub views: Vec<PathBuf>,
    #[arg(long)]
    pub rank: usize,
    /// Reduce every view to this many principal components first.
    #[arg(long)]
    pub pca_dim: Option<usize>,
    /// Absolute covariance eigenvalue floor. Defaults to 1e-8 times the
    /// mean eigenvalue of each view.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Subtract per-view means before fitting.
    #[arg(long)]
    pub center: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct TccaTransformArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, num_args = 2.., required = true)]
    pub views: Vec<PathBuf>,
    /// Output CSV with the projected views side by side.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "8x6x5")]
    pub shape: String,
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    /// Noise norm relative to the norm of the planted tensor.
    #[arg(long, default_value_t = 1e-3)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Master seed; per-trial seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random ALS initializations per trial.
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    /// Output prefix for `<out>.trials.csv` and `<out>.report.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn run(cli: Cli) -> CliResult<()> {
    let timings = cli.timings;
    match cli.command {
        Command::Decompose(args) => commands::decompose::run(&args, timings),
        Command::Synth { kind } => match kind {
            SynthKind::Tensor(args) => commands::synth::tensor(&args),
            SynthKind::Multiview(args) => commands::synth::multiview(&args),
        },
        Command::TccaFit(args) => commands::tcca::fit(&args, timings),
        Command::TccaTransform(args) => commands::tcca::transform(&args),
        Command::Bench(args) => commands::bench::run(&args, timings),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_byte(&e))
        }
    }
}

fn exit_byte(e: &CliError) -> u8 {
    u8::try_from(e.exit_code()).unwrap_or(1)
}
