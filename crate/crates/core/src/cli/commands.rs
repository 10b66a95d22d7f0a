use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{self, parse_number, resolve, Number, RunConfig};
use super::output::{params_label, trajectory_json, trajectory_table};
use super::{CliError, CommonArgs, Format, GeodesicArgs, PicardArgs, SweepArgs, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY};
use crate::asymptotics::{classify_regime, verify as verify_trajectory, Check, Regime, VerificationReport};
use crate::geometry::{completeness_diagnostic, curvature_profile, curvature_sign_violations, Completeness, MetricProfile};
use crate::integrator::{build_seed, integrate, integrate_negative_lambda, IntegratorConfig, NegativeLambdaRun};
use crate::model::{SeederKind, SolitonParams, Termination, Trajectory};
use crate::picard::{contraction_epsilon, empirical_contraction_ratio, picard_solve, ContractionConstants, PicardConfig, PicardReport};
use crate::series::{compute_coefficients, eval_series, DEFAULT_ORDER};

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::usage(format!("cannot write to standard output: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

enum Outcome {
    Full(Trajectory),
    Window(NegativeLambdaRun),
}

impl Outcome {
    fn trajectory(&self) -> &Trajectory {
        match self {
            Outcome::Full(t) => t,
            Outcome::Window(w) => &w.trajectory,
        }
    }
}

fn run_profile(params: &SolitonParams, seeder: SeederKind, cfg: &IntegratorConfig) -> crate::error::Result<Outcome> {
    let seed = build_seed(params, seeder)?;
    if params.lambda < 0.0 {
        integrate_negative_lambda(params, seed.as_ref(), cfg).map(Outcome::Window)
    } else {
        integrate(params, seed.as_ref(), cfg).map(Outcome::Full)
    }
}

/// Why a finished run does not count as a solution, if it does not.
fn solve_failure(outcome: &Outcome) -> Option<String> {
    match outcome {
        Outcome::Window(w) if !w.reached_target => Some(format!(
            "run stopped ({}) before r = {:e}",
            w.trajectory.termination.label(),
            w.r_target
        )),
        Outcome::Window(_) => None,
        Outcome::Full(t) => {
            let growth_ok = matches!(classify_regime(&t.params), Ok(Regime::SteadyPos | Regime::ExpandingSuper));
            match t.termination {
                Termination::ReachedRMax => None,
                Termination::GrowthGuard(_) if growth_ok => None,
                other => Some(format!("run stopped early: {} at r = {:e}", other.label(), t.r_end())),
            }
        }
    }
}

pub fn solve(args: &CommonArgs) -> Result<i32, CliError> {
    let rc = resolve(args)?;
    let outcome = run_profile(&rc.params, rc.seeder, &rc.integrator)?;
    let cfg = effective_config(&rc, &outcome);
    let traj = outcome.trajectory();
    let text = match rc.format {
        Format::Csv => trajectory_table(traj, &cfg).to_csv(),
        Format::Json => trajectory_json(traj, &cfg) + "\n",
    };
    write_output(&rc.out, &text)?;
    eprintln!(
        "{} samples, r_end = {:e}, termination = {}",
        traj.samples.len(),
        traj.r_end(),
        traj.termination.label()
    );
    match solve_failure(&outcome) {
        Some(msg) => {
            eprintln!("error: {msg}");
            Ok(EXIT_SOLVER)
        }
        None => Ok(EXIT_OK),
    }
}

/// The shrinking-soliton run may have extended `r_max` to its target.
fn effective_config(rc: &RunConfig, outcome: &Outcome) -> IntegratorConfig {
    let mut cfg = rc.integrator.clone();
    if let Outcome::Window(w) = outcome {
        cfg.r_max = cfg.r_max.max(w.r_target);
    }
    cfg
}

/// Verification of a shrinking soliton: only the guaranteed window is checked.
#[derive(Debug, Serialize)]
pub struct WindowReport {
    pub params: SolitonParams,
    pub regime: &'static str,
    pub termination: Termination,
    pub r_target: f64,
    pub r_critical: f64,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

fn window_report(run: &NegativeLambdaRun) -> WindowReport {
    let mut notes = Vec::new();
    if run.continued_past_critical {
        notes.push(format!("run continued past r = {:e}", run.r_critical));
    }
    WindowReport {
        params: run.trajectory.params,
        regime: "Shrinking",
        termination: run.trajectory.termination,
        r_target: run.r_target,
        r_critical: run.r_critical,
        checks: vec![Check {
            name: "reached 0.99 (n-1)/|lambda|".into(),
            claim_ref: "a shrinking profile exists at least up to 0.99 (n-1)/|lambda|".into(),
            measured: run.trajectory.r_end().min(run.r_target),
            tolerance: 0.0,
            pass: run.reached_target,
        }],
        notes,
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum AnyReport {
    Full(VerificationReport),
    Window(WindowReport),
}

impl AnyReport {
    fn pass(&self) -> bool {
        match self {
            AnyReport::Full(r) => r.all_pass(),
            AnyReport::Window(w) => w.checks.iter().all(|c| c.pass),
        }
    }

    fn checks(&self) -> &[Check] {
        match self {
            AnyReport::Full(r) => &r.checks,
            AnyReport::Window(w) => &w.checks,
        }
    }
}

fn report_for(outcome: &Outcome) -> crate::error::Result<AnyReport> {
    Ok(match outcome {
        Outcome::Full(t) => AnyReport::Full(verify_trajectory(t)?),
        Outcome::Window(w) => AnyReport::Window(window_report(w)),
    })
}

pub fn verify(args: &CommonArgs) -> Result<i32, CliError> {
    let rc = resolve(args)?;
    let outcome = run_profile(&rc.params, rc.seeder, &rc.integrator)?;
    let report = report_for(&outcome)?;
    write_output(&rc.out, &to_json(&report))?;
    for c in report.checks().iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: measured {:e}, tolerance {:e}", c.name, c.measured, c.tolerance);
    }
    Ok(if report.pass() { EXIT_OK } else { EXIT_VERIFY })
}

fn parse_n_list(items: &[String]) -> Result<Vec<u32>, CliError> {
    let mut out = Vec::new();
    for item in items {
        let item = item.trim();
        if let Some((a, b)) = item.split_once("..") {
            let a: u32 = a.trim().parse().map_err(|_| CliError::usage(format!("bad range {item:?}")))?;
            let b: u32 = b.trim().parse().map_err(|_| CliError::usage(format!("bad range {item:?}")))?;
            out.extend(a..=b);
        } else if !item.is_empty() {
            out.push(item.parse().map_err(|_| CliError::usage(format!("bad dimension {item:?}")))?);
        }
    }
    Ok(out)
}

fn parse_number_list(items: &[String]) -> Result<Vec<Number>, CliError> {
    items
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_number(s).map_err(CliError::usage))
        .collect()
}

/// One row of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: u32,
    pub lambda: String,
    pub mu1: String,
    pub regime: String,
    pub termination: Option<String>,
    pub r_end: Option<f64>,
    pub checks_passed: usize,
    pub checks_total: usize,
    pub pass: bool,
    pub limits: BTreeMap<String, f64>,
    pub error: Option<String>,
}

const SWEEP_LIMITS: [&str; 6] = ["h_inf", "hr_inf", "q_inf", "b1", "v_inf", "w_inf"];

fn sweep_cell(params: &SolitonParams, seeder: SeederKind, cfg: &IntegratorConfig) -> SweepRow {
    let (lambda, mu1) = params_label(params);
    let regime = match classify_regime(params) {
        Ok(r) => format!("{r:?}"),
        Err(_) => "Shrinking".into(),
    };
    let mut row = SweepRow {
        n: params.n,
        lambda,
        mu1,
        regime,
        termination: None,
        r_end: None,
        checks_passed: 0,
        checks_total: 0,
        pass: false,
        limits: BTreeMap::new(),
        error: None,
    };
    let result = run_profile(params, seeder, cfg).and_then(|o| Ok((report_for(&o)?, o)));
    match result {
        Ok((report, outcome)) => {
            let t = outcome.trajectory();
            row.termination = Some(t.termination.label().to_string());
            row.r_end = Some(t.r_end());
            row.checks_total = report.checks().len();
            row.checks_passed = report.checks().iter().filter(|c| c.pass).count();
            row.pass = report.pass();
            if let AnyReport::Full(r) = &report {
                row.limits = r.limits.iter().map(|(k, v)| (k.clone(), v.value)).collect();
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,lambda,mu1,regime,termination,r_end,checks_passed,checks_total,pass");
    for k in SWEEP_LIMITS {
        let _ = write!(out, ",{k}");
    }
    out.push_str(",error\n");
    let opt = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.lambda,
            r.mu1,
            r.regime,
            r.termination.as_deref().unwrap_or(""),
            opt(r.r_end),
            r.checks_passed,
            r.checks_total,
            r.pass
        );
        for k in SWEEP_LIMITS {
            let _ = write!(out, ",{}", opt(r.limits.get(k).copied()));
        }
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(out, ",{err}");
    }
    out
}

pub fn sweep(args: &SweepArgs) -> Result<i32, CliError> {
    let s = config::settings(&args.settings)?;
    let ns = parse_n_list(&args.n)?;
    let lambdas = parse_number_list(&args.lambda)?;
    let mu1s = parse_number_list(&args.mu1)?;
    let mut grid = Vec::new();
    for &n in &ns {
        for &l in &lambdas {
            for &m in &mu1s {
                grid.push(config::build_params(n, l, m)?);
            }
        }
    }
    if grid.is_empty() {
        return Err(CliError::usage("empty parameter grid: give at least one --n, --lambda and --mu1"));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = s.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::solver(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> =
        pool.install(|| grid.par_iter().map(|p| sweep_cell(p, s.seeder, &s.integrator)).collect());
    let text = match s.format {
        Format::Csv => sweep_csv(&rows),
        Format::Json => to_json(&rows),
    };
    write_output(&s.out, &text)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} of {} cells passed", rows.len() - failed, rows.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY })
}

/// Largest `a` at which the profile is usable: a run ending in positivity
/// loss stops one sample short of the zero of `h`.
fn usable_a_max(traj: &Trajectory) -> f64 {
    let r = match traj.termination {
        Termination::PositivityLoss(_) if traj.samples.len() >= 2 => traj.samples[traj.samples.len() - 2].r,
        _ => traj.r_end(),
    };
    r.sqrt()
}

fn default_a_grid(a_max: f64, points: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    if points == 0 || !(a_max > 0.0) {
        return grid;
    }
    let a_lo = (1e-2f64).min(a_max / 100.0);
    let span = (a_max / a_lo).ln();
    for i in 0..points {
        let frac = if points == 1 { 1.0 } else { i as f64 / (points - 1) as f64 };
        grid.push(if i + 1 == points { a_max } else { a_lo * (span * frac).exp() });
    }
    grid
}

#[derive(Serialize)]
struct GeodesicDoc<'a> {
    params: SolitonParams,
    termination: Termination,
    profile: &'a MetricProfile,
    curvature_sign_violations: usize,
    completeness: Option<Completeness>,
}

pub fn geodesic(args: &GeodesicArgs) -> Result<i32, CliError> {
    let rc = resolve(&args.common)?;
    let outcome = run_profile(&rc.params, rc.seeder, &rc.integrator)?;
    let traj = outcome.trajectory();
    let a_max = usable_a_max(traj);
    let grid = if args.a.is_empty() { default_a_grid(a_max, args.points) } else { args.a.clone() };
    if grid.iter().any(|&a| a > a_max) {
        return Err(CliError::usage(format!("a values must not exceed sqrt(r_end) = {a_max:e}")));
    }
    let profile = curvature_profile(traj, &grid).map_err(|e| CliError::usage(e.to_string()))?;
    let completeness = completeness_diagnostic(traj).ok();
    let violations = curvature_sign_violations(&profile, traj.params.mu1);
    let text = match rc.format {
        Format::Json => to_json(&GeodesicDoc {
            params: traj.params,
            termination: traj.termination,
            profile: &profile,
            curvature_sign_violations: violations,
            completeness,
        }),
        Format::Csv => {
            let (lambda, mu1) = params_label(&traj.params);
            let mut out = String::new();
            let _ = writeln!(out, "# n={}\n# lambda={lambda}\n# mu1={mu1}", traj.params.n);
            let _ = writeln!(out, "# termination={}", traj.termination.label());
            let _ = writeln!(out, "# curvature_sign_violations={violations}");
            if let Some(c) = completeness {
                let _ = writeln!(out, "# t_at_rmax={:?}", c.t_at_rmax);
                let _ = writeln!(out, "# growth_exponent={:?}", c.growth_exponent);
                let _ = writeln!(out, "# diverging={}", c.diverging);
            }
            out.push_str("a,t,kappa_radial,kappa_orbital\n");
            for i in 0..profile.a_grid.len() {
                let _ = writeln!(
                    out,
                    "{:?},{:?},{:?},{:?}",
                    profile.a_grid[i], profile.t_of_a[i], profile.kappa_radial[i], profile.kappa_orbital[i]
                );
            }
            out
        }
    };
    write_output(&rc.out, &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PicardDoc {
    params: SolitonParams,
    constants: ContractionConstants,
    config: PicardConfig,
    report: PicardReport,
    max_ratio: Option<f64>,
    /// Largest deviation from the power series on the part of the grid
    /// inside its guaranteed radius.
    series_max_dh: Option<f64>,
    series_max_dw: Option<f64>,
}

pub fn picard_lab(args: &PicardArgs) -> Result<i32, CliError> {
    let s = config::settings(&args.settings)?;
    let n = args.params.n.ok_or_else(|| CliError::usage("--n is required"))?;
    let num = |v: &Option<String>, name: &str| -> Result<Number, CliError> {
        parse_number(v.as_deref().ok_or_else(|| CliError::usage(format!("--{name} is required")))?)
            .map_err(CliError::usage)
    };
    let params = config::build_params(n, num(&args.params.lambda, "lambda")?, num(&args.params.mu1, "mu1")?)?;
    if args.grid < 2 || !(args.tol > 0.0) || args.max_iter == 0 {
        return Err(CliError::usage("need --grid >= 2, --tol > 0 and --max-iter >= 1"));
    }
    let constants = contraction_epsilon(&params);
    let eps = args.eps.unwrap_or(constants.eps2);
    let pcfg = PicardConfig { grid: args.grid, tol: args.tol, max_iter: args.max_iter };
    let (pair, report) = picard_solve(&params, eps, &pcfg)?;

    let series = compute_coefficients(&params, DEFAULT_ORDER)?;
    let (mut dh, mut dw, mut compared) = (0.0f64, 0.0f64, false);
    for i in 0..=pair.intervals() {
        let r = pair.node(i);
        if let Ok((h, hr)) = eval_series(&series, r) {
            compared = true;
            dh = dh.max((h - pair.h_vals[i]).abs());
            dw = dw.max((hr - pair.w_vals[i]).abs());
        }
    }
    let doc = PicardDoc {
        params,
        constants,
        config: pcfg,
        max_ratio: empirical_contraction_ratio(&report).ok(),
        report,
        series_max_dh: compared.then_some(dh),
        series_max_dw: compared.then_some(dw),
    };
    let format = args.settings.format.or(s.file.format).unwrap_or(Format::Json);
    let text = match format {
        Format::Json => to_json(&doc),
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# eps={:?}\n# eps2={:?}", eps, constants.eps2);
            let _ = writeln!(out, "# iterations={}", doc.report.iterations);
            let _ = writeln!(out, "# final_residual={:?}", doc.report.final_residual);
            if let Some(m) = doc.max_ratio {
                let _ = writeln!(out, "# max_ratio={m:?}");
            }
            out.push_str("r,h,w\n");
            for i in 0..=pair.intervals() {
                let _ = writeln!(out, "{:?},{:?},{:?}", pair.node(i), pair.h_vals[i], pair.w_vals[i]);
            }
            out
        }
    };
    write_output(&s.out, &text)?;
    if doc.report.exploratory {
        eprintln!("note: eps = {eps:e} exceeds the contraction radius {:e}; no contraction is claimed", constants.eps2);
    }
    Ok(EXIT_OK)
}
