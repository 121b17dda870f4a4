//! Command-line front end.
//!
//! Every path through [`run`] ends in one of four exit codes: [`EXIT_OK`],
//! [`EXIT_INVARIANT`], [`EXIT_BAD_INPUT`] or [`EXIT_INAPPLICABLE`].

mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::TrendError;

pub const EXIT_OK: i32 = 0;
/// Conservation or positivity broke during a run, or an envelope was violated.
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
/// The decay bounds do not apply to this run.
pub const EXIT_INAPPLICABLE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    BadInput(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Inapplicable(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::BadInput(_) => EXIT_BAD_INPUT,
            Failure::Invariant(_) => EXIT_INVARIANT,
            Failure::Inapplicable(_) => EXIT_INAPPLICABLE,
        }
    }
}

impl From<TrendError> for Failure {
    fn from(e: TrendError) -> Self {
        match e {
            TrendError::Domain(_)
            | TrendError::TooFewSamples { .. }
            | TrendError::ThresholdNotReached { .. } => Failure::Invariant(e.to_string()),
            _ => Failure::BadInput(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "trendcycle",
    version,
    about = "Simulate and verify trend-cycle adoption models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one run and write trajectory, summary and plot files.
    Simulate(RunArgs),
    /// Print the trend class for a parameter set.
    Classify(ClassifyArgs),
    /// Check a run against its decay-bound envelope.
    Verify(VerifyArgs),
    /// Run one simulation per value of a single parameter.
    Sweep(SweepArgs),
    /// Draw a trajectory CSV (and optional envelope CSV) as SVG.
    Plot(PlotArgs),
    /// List the built-in scenarios.
    ListScenarios,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub scenario: Option<String>,
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long, conflicts_with = "config")]
    pub scenario: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Decay exponent; overrides the scenario or config value.
    #[arg(long, allow_negative_numbers = true, required_unless_present_any = ["scenario", "config"])]
    pub p: Option<f64>,
    /// Constant recurrence rate; overrides the scenario or config value.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Absolute tolerance on the envelope.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// One of m1, m2, m3, m4, l_alpha, l_beta, p, delta.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values; may be empty.
    #[arg(long, allow_hyphen_values = true)]
    pub values: String,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Trajectory CSV.
    pub input: PathBuf,
    /// Envelope CSV with columns t,lower,upper.
    #[arg(long)]
    pub envelope: Option<PathBuf>,
    /// Output directory (defaults to the input's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_BAD_INPUT
            } else {
                EXIT_OK
            };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
