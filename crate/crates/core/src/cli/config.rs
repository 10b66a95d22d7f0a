//! Run configuration: flags, optional TOML file, and the rational parser.

use std::path::{Path, PathBuf};

use num_rational::Ratio;
use serde::Deserialize;

use super::{CliError, CommonArgs, Format, SettingsArgs};
use crate::integrator::IntegratorConfig;
use crate::model::{SeederKind, SolitonParams};

/// A number given on the command line, with its exact value when it was
/// written as an integer, a fraction `p/q` or a plain decimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Number {
    pub value: f64,
    pub exact: Option<Ratio<i64>>,
}

pub fn parse_number(s: &str) -> Result<Number, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if q == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Number { value: p as f64 / q as f64, exact: Some(Ratio::new(p, q)) });
    }
    let value: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !value.is_finite() {
        return Err(format!("not a finite number: {s:?}"));
    }
    Ok(Number { value, exact: decimal_ratio(s) })
}

/// `"-0.125"` -> `-1/8`; `None` for exponents or too many digits.
fn decimal_ratio(s: &str) -> Option<Ratio<i64>> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if int.len() + frac.len() > 18 {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    let scale = 10i64.checked_pow(frac.len() as u32)?;
    let r = Ratio::new(digits, scale);
    Some(if neg { -r } else { r })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Num(f64),
    Str(String),
}

impl NumOrStr {
    fn to_number(&self) -> Result<Number, String> {
        match self {
            NumOrStr::Num(v) => Ok(Number { value: *v, exact: None }),
            NumOrStr::Str(s) => parse_number(s),
        }
    }
}

/// Keys accepted in a `--config` TOML file; flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    n: Option<u32>,
    lambda: Option<NumOrStr>,
    mu1: Option<NumOrStr>,
    rmax: Option<f64>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    seeder: Option<SeederKind>,
    out: Option<PathBuf>,
    pub(super) format: Option<Format>,
    jobs: Option<usize>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
}

/// Everything a single-profile command needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: SolitonParams,
    pub seeder: SeederKind,
    pub integrator: IntegratorConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
}

pub const DEFAULT_RMAX: f64 = 1e6;

/// Merged flag/file settings before the profile parameters are required.
pub struct Settings {
    pub file: FileConfig,
    pub integrator: IntegratorConfig,
    pub seeder: SeederKind,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
}

pub fn settings(args: &SettingsArgs) -> Result<Settings, CliError> {
    let file = match &args.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let mut integrator = IntegratorConfig::with_r_max(args.rmax.or(file.rmax).unwrap_or(DEFAULT_RMAX));
    if let Some(t) = args.rel_tol.or(file.rel_tol) {
        integrator.rel_tol = t;
    }
    if let Some(t) = args.abs_tol.or(file.abs_tol) {
        integrator.abs_tol = t;
    }
    if !(integrator.rel_tol > 0.0 && integrator.abs_tol > 0.0) {
        return Err(CliError::usage("tolerances must be positive"));
    }
    if !(integrator.r_max > 0.0 && integrator.r_max.is_finite()) {
        return Err(CliError::usage("--rmax must be positive and finite"));
    }
    let jobs = args.jobs.or(file.jobs);
    if jobs == Some(0) {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    Ok(Settings {
        seeder: args.seeder.or(file.seeder).unwrap_or(SeederKind::Series),
        out: args.out.clone().or(file.out.clone()),
        format: args.format.or(file.format).unwrap_or(Format::Csv),
        jobs,
        integrator,
        file,
    })
}

pub fn build_params(n: u32, lambda: Number, mu1: Number) -> Result<SolitonParams, CliError> {
    let p = match (lambda.exact, mu1.exact) {
        (Some(l), Some(m)) => SolitonParams::from_rationals(n, l, m),
        _ => SolitonParams::new(n, lambda.value, mu1.value),
    };
    p.map_err(|e| CliError::usage(e.to_string()))
}

pub fn resolve(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let s = settings(&args.settings)?;
    let args = &args.params;
    let n = args.n.or(s.file.n).ok_or_else(|| CliError::usage("--n is required"))?;
    let number = |flag: &Option<String>, file: &Option<NumOrStr>, name: &str| -> Result<Number, CliError> {
        match (flag, file) {
            (Some(v), _) => parse_number(v),
            (None, Some(v)) => v.to_number(),
            (None, None) => Err(format!("--{name} is required")),
        }
        .map_err(CliError::usage)
    };
    let lambda = number(&args.lambda, &s.file.lambda, "lambda")?;
    let mu1 = number(&args.mu1, &s.file.mu1, "mu1")?;
    Ok(RunConfig {
        params: build_params(n, lambda, mu1)?,
        seeder: s.seeder,
        integrator: s.integrator,
        out: s.out,
        format: s.format,
        jobs: s.jobs,
    })
}
