//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 solver failure, 3 verification
//! failure.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::SolitonError;
use crate::model::SeederKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Self { code: EXIT_SOLVER, message: message.into() }
    }
}

impl From<SolitonError> for CliError {
    fn from(e: SolitonError) -> Self {
        match e {
            SolitonError::InvalidParams(_) => Self::usage(e.to_string()),
            _ => Self::solver(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn parse_seeder(s: &str) -> Result<SeederKind, String> {
    match s {
        "series" => Ok(SeederKind::Series),
        "picard" => Ok(SeederKind::Picard),
        "both" => Ok(SeederKind::Both),
        _ => Err(format!("unknown seeder {s:?} (expected series, picard or both)")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "soliton-kit", version, about = "Rotationally symmetric gradient Ricci soliton profiles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one profile and write the trajectory.
    Solve(ProfileArgs),
    /// Integrate one profile and check its asymptotic behaviour.
    Verify(ProfileArgs),
    /// Verify every profile of a parameter grid.
    Sweep(SweepArgs),
    /// Geodesic distance and sectional curvatures of one profile.
    Geodesic(GeodesicArgs),
    /// Picard iteration diagnostics near the origin.
    PicardLab(PicardArgs),
}

/// Profile parameters; numbers accept fractions such as `1/3`.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu1: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SettingsArgs {
    /// TOML file with the same keys as the flags (flags win).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long, value_parser = parse_seeder)]
    pub seeder: Option<SeederKind>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, env = "SOLITON_KIT_JOBS")]
    pub jobs: Option<usize>,
}

/// Flags shared by the single-profile commands.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub settings: SettingsArgs,
}

impl std::ops::Deref for CommonArgs {
    type Target = SettingsArgs;
    fn deref(&self) -> &SettingsArgs {
        &self.settings
    }
}

pub type ProfileArgs = CommonArgs;

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Comma-separated values or an inclusive range `a..b`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub n: Vec<String>,
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pub lambda: Vec<String>,
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pub mu1: Vec<String>,
    #[command(flatten)]
    pub settings: SettingsArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of log-spaced `a` values (besides `a = 0`).
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Explicit `a` values instead of the log-spaced grid.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PicardArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Interval length; defaults to the contraction radius.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Number of grid intervals.
    #[arg(long, default_value_t = crate::picard::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[command(flatten)]
    pub settings: SettingsArgs,
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Geodesic(a) => commands::geodesic(&a),
        Command::PicardLab(a) => commands::picard_lab(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
