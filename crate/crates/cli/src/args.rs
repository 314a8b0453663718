use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "hbt",
    version,
    about = "Two-particle interference scenarios: curves, coincidence Monte Carlo, fringe fits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its outputs.
    Run(RunArgs),
    /// List the built-in presets.
    Presets,
    /// Compare two report.json files from runs on the same scan grid.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in scenario to start from.
    #[arg(long)]
    pub preset: Option<String>,
    /// File of `key = value` lines applied after the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one field; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo samples (0 disables the Monte Carlo).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write only this format (default: both).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub report_a: PathBuf,
    pub report_b: PathBuf,
    /// Pointwise relative tolerance for curves of the same physics.
    #[arg(long, default_value_t = 1e-9)]
    pub curve_tol: f64,
    /// Relative tolerance on the fringe period.
    #[arg(long, default_value_t = crate::run::PERIOD_TOLERANCE)]
    pub period_tol: f64,
    /// Absolute tolerance on the visibility.
    #[arg(long, default_value_t = crate::run::VISIBILITY_TOLERANCE)]
    pub visibility_tol: f64,
    /// Print the summary as JSON instead of text.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
