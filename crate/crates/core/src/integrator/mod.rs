//! Continuation of a seeded profile from `r_seed` out to `r_max`.
//!
//! Up to `log_switch_radius` the state is `(h, h_r)` in `r`; beyond it the
//! state is `(ln h, 1 + q)` with `q = r h_r / h`, in `s = ln r`, where every asymptotic
//! regime becomes slowly varying and the step count is O(decades). Each step
//! is a Dormand–Prince 5(4) step with PI control. Steps are shortened so that
//! they land exactly on the log-uniform checkpoint grid, on the phase switch,
//! on `r_max` and on any caller-supplied stops, so stored checkpoint values
//! are genuine integrator states rather than interpolants.

mod rk;

use rk::{dopri5_step, error_norm, State};

use crate::error::{Result, SolitonError};
use crate::interp::{adaptive_quad, ProfileInterpolant};
use crate::model::{
    checkpoint_index_above, checkpoint_radius, log_rhs_z, rhs_unchecked, Checkpoint, SeederKind,
    SolitonParams, SolutionSample, Termination, Trajectory,
};
use crate::picard::{contraction_epsilon, picard_solve, GridFunctionPair, PicardConfig, PicardReport};
use crate::series::{compute_coefficients, eval_series, SeriesSolution, DEFAULT_ORDER};

/// Largest allowed `|dh|` or `|dh_r|` between the two seeders in `Both` mode.
pub const SEEDER_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub r_max: f64,
    /// Terminate once `h` exceeds this.
    pub growth_guard: f64,
    /// Smallest step, as a fraction of the current `r`.
    pub min_step_fraction: f64,
    /// Radius beyond which the independent variable is `ln r`.
    pub log_switch_radius: f64,
    /// Additional radii the integrator must land on exactly.
    pub extra_stops: Vec<f64>,
    /// Budget of attempted steps; running out counts as a step underflow.
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            r_max: 1e6,
            growth_guard: 1e12,
            min_step_fraction: 1e-14,
            log_switch_radius: 1e3,
            extra_stops: Vec::new(),
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_r_max(r_max: f64) -> Self {
        Self { r_max, ..Self::default() }
    }

    fn validate(&self, r_seed: f64) -> Result<()> {
        let bad = |m: String| Err(SolitonError::InvalidParams(m));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad(format!("tolerances must be positive (rel {}, abs {})", self.rel_tol, self.abs_tol));
        }
        if !(self.r_max > r_seed) || !self.r_max.is_finite() {
            return bad(format!("r_max = {} must exceed the seed radius {r_seed}", self.r_max));
        }
        if !(self.growth_guard > 1.0) {
            return bad(format!("growth guard must exceed 1, got {}", self.growth_guard));
        }
        if !(self.min_step_fraction > 0.0 && self.log_switch_radius > 0.0) {
            return bad("step fraction and switch radius must be positive".into());
        }
        Ok(())
    }
}

/// A local solution near the origin that hands `(h, h_r)` to the integrator.
pub trait Seed: Send + Sync {
    fn kind(&self) -> SeederKind;
    fn handoff_radius(&self) -> f64;
    /// `(h, h_r)` at `0 <= r <= handoff_radius()`.
    fn eval(&self, r: f64) -> Result<(f64, f64)>;
}

impl Seed for SeriesSolution {
    fn kind(&self) -> SeederKind {
        SeederKind::Series
    }
    fn handoff_radius(&self) -> f64 {
        self.handoff_radius
    }
    fn eval(&self, r: f64) -> Result<(f64, f64)> {
        eval_series(self, r)
    }
}

/// Fixed point of the Picard map on `[0, eps]`.
#[derive(Debug, Clone)]
pub struct PicardSeed {
    pub pair: GridFunctionPair,
    pub report: PicardReport,
}

impl PicardSeed {
    /// Solves on `[0, eps_2]` with the default grid.
    pub fn new(params: &SolitonParams) -> Result<Self> {
        let eps = contraction_epsilon(params).eps2;
        let (pair, report) = picard_solve(params, eps, &PicardConfig::default())?;
        Ok(Self { pair, report })
    }
}

impl Seed for PicardSeed {
    fn kind(&self) -> SeederKind {
        SeederKind::Picard
    }
    fn handoff_radius(&self) -> f64 {
        self.pair.eps
    }
    fn eval(&self, r: f64) -> Result<(f64, f64)> {
        self.pair.eval(r)
    }
}

/// Both seeders, cross-checked; the series (the more accurate one) is used.
#[derive(Debug, Clone)]
pub struct CheckedSeed {
    pub series: SeriesSolution,
    pub picard: PicardSeed,
    /// Radius of the comparison, the smaller of the two handoff radii.
    pub compared_at: f64,
    pub dh: f64,
    pub dhr: f64,
}

impl CheckedSeed {
    pub fn new(params: &SolitonParams) -> Result<Self> {
        let series = compute_coefficients(params, DEFAULT_ORDER)?;
        let picard = PicardSeed::new(params)?;
        let at = series.handoff_radius.min(picard.handoff_radius());
        let (hs, hrs) = series.eval(at)?;
        let (hp, hrp) = picard.eval(at)?;
        let (dh, dhr) = ((hs - hp).abs(), (hrs - hrp).abs());
        if !(dh <= SEEDER_AGREEMENT && dhr <= SEEDER_AGREEMENT) {
            return Err(SolitonError::SeederMismatch { dh, dhr });
        }
        Ok(Self { series, picard, compared_at: at, dh, dhr })
    }
}

impl Seed for CheckedSeed {
    fn kind(&self) -> SeederKind {
        SeederKind::Both
    }
    fn handoff_radius(&self) -> f64 {
        self.series.handoff_radius
    }
    fn eval(&self, r: f64) -> Result<(f64, f64)> {
        self.series.eval(r)
    }
}

pub fn build_seed(params: &SolitonParams, kind: SeederKind) -> Result<Box<dyn Seed>> {
    Ok(match kind {
        SeederKind::Series => Box::new(compute_coefficients(params, DEFAULT_ORDER)?),
        SeederKind::Picard => Box::new(PicardSeed::new(params)?),
        SeederKind::Both => Box::new(CheckedSeed::new(params)?),
    })
}

/// Seeds with `kind` and integrates.
pub fn solve(params: &SolitonParams, kind: SeederKind, config: &IntegratorConfig) -> Result<Trajectory> {
    let seed = build_seed(params, kind)?;
    integrate(params, seed.as_ref(), config)
}

#[derive(Clone, Copy, PartialEq)]
enum Vars {
    /// `t = r`, `y = (h, h_r)`
    Radial,
    /// `t = ln r`, `y = (ln h, 1 + q)`
    Log,
}

impl Vars {
    fn rhs(self, p: &SolitonParams, t: f64, y: &State) -> State {
        match self {
            Vars::Radial => [y[1], rhs_unchecked(p, t, y[0], y[1])],
            Vars::Log => log_rhs_z(p, t, y[0], y[1]),
        }
    }

    fn h(self, y: &State) -> f64 {
        match self {
            Vars::Radial => y[0],
            Vars::Log => y[0].exp(),
        }
    }

    fn radius(self, t: f64) -> f64 {
        match self {
            Vars::Radial => t,
            Vars::Log => t.exp(),
        }
    }

    fn time(self, r: f64) -> f64 {
        match self {
            Vars::Radial => r,
            Vars::Log => r.ln(),
        }
    }

    fn sample(self, r: f64, y: &State) -> SolutionSample {
        match self {
            Vars::Radial => SolutionSample { r, h: y[0], hr: y[1] },
            Vars::Log => {
                let h = y[0].exp();
                SolutionSample { r, h, hr: (y[1] - 1.0) * h / r }
            }
        }
    }

    fn state(self, s: &SolutionSample) -> State {
        match self {
            Vars::Radial => [s.h, s.hr],
            Vars::Log => [s.h.ln(), (s.r * s.hr + s.h) / s.h],
        }
    }

    /// Error norm at radius `r`.
    ///
    /// In `r` the absolute tolerance on `h_r` is `atol / r`, the slope that
    /// changes `h` by `atol` over the distance `r`, and its relative part is
    /// taken against the smaller of `|h_r|` and `|h_r + h/r| = |u_r| / r`, so
    /// that `1 + q` stays resolved when `q` approaches `-1`. In log variables
    /// an error in `ln h` already is a relative error of `h`, and the second
    /// component is `1 + q` itself.
    fn norm(self, err: &State, y0: &State, y1: &State, r: f64, rtol: f64, atol: f64) -> f64 {
        let scale = match self {
            Vars::Radial => {
                let slope = |y: &State| y[1].abs().min((y[1] + y[0] / r).abs());
                [atol + rtol * y0[0].abs().max(y1[0].abs()), atol / r + rtol * slope(y0).max(slope(y1))]
            }
            Vars::Log => [rtol + atol, atol + rtol * y0[1].abs().max(y1[1].abs())],
        };
        error_norm(err, &scale)
    }

    /// Local error of `h` itself.
    fn h_error(self, err: &State, y1: &State) -> f64 {
        match self {
            Vars::Radial => err[0].abs(),
            Vars::Log => err[0].abs() * y1[0].exp(),
        }
    }

    fn min_step(self, r: f64, fraction: f64) -> f64 {
        match self {
            Vars::Radial => fraction * r,
            Vars::Log => fraction,
        }
    }
}

struct Run<'a> {
    params: &'a SolitonParams,
    config: &'a IntegratorConfig,
    stops: Vec<f64>,
    samples: Vec<SolutionSample>,
    checkpoints: Vec<Checkpoint>,
    error_estimate: f64,
    accepted: usize,
    rejected: usize,
}

enum PhaseEnd {
    Done { dt: f64 },
    Event(Termination),
}

impl Run<'_> {
    /// Next radius strictly above `r` that a step has to land on, capped at `end`.
    fn next_stop(&self, r: f64, end: f64) -> (f64, Option<i64>) {
        let k = checkpoint_index_above(r, true);
        let rk = checkpoint_radius(k);
        let extra = self.stops.iter().copied().find(|&x| x > r).unwrap_or(f64::INFINITY);
        let stop = rk.min(extra).min(end);
        (stop, (stop == rk).then_some(k))
    }

    fn valid(&self, vars: Vars, y: &State) -> bool {
        let h = vars.h(y);
        y[0].is_finite() && y[1].is_finite() && h > self.config.abs_tol && h <= self.config.growth_guard
    }

    fn event_at(&self, vars: Vars, y: &State, r: f64) -> Termination {
        let h = vars.h(y);
        if h > self.config.growth_guard {
            Termination::GrowthGuard(r)
        } else {
            Termination::PositivityLoss(r)
        }
    }

    /// Integrates from the last stored sample to radius `end` in `vars`.
    fn phase(&mut self, vars: Vars, end: f64, dt0: f64) -> PhaseEnd {
        let p = self.params;
        let cfg = self.config;
        let f = |t: f64, y: &State| vars.rhs(p, t, y);

        let start = *self.samples.last().expect("seeded");
        let mut r = start.r;
        let mut t = vars.time(r);
        let mut y = vars.state(&start);
        let mut dy = f(t, &y);
        let mut dt = dt0;
        let mut err_prev: f64 = 1.0;

        while r < end {
            if self.accepted + self.rejected >= cfg.max_steps {
                return PhaseEnd::Event(Termination::StepUnderflow(r));
            }
            let (stop_r, checkpoint) = self.next_stop(r, end);
            let stop_t = vars.time(stop_r);
            let clamped = dt >= stop_t - t;
            let dt_try = if clamped { stop_t - t } else { dt };
            if dt_try < vars.min_step(r, cfg.min_step_fraction) && !clamped {
                return PhaseEnd::Event(Termination::StepUnderflow(r));
            }

            let step = dopri5_step(&f, t, &y, &dy, dt_try);
            let en = vars.norm(&step.err, &y, &step.y, r, cfg.rel_tol, cfg.abs_tol);
            if !en.is_finite() || !step.y[0].is_finite() || !step.y[1].is_finite() {
                self.rejected += 1;
                dt = 0.2 * dt_try;
                continue;
            }
            if en > 1.0 {
                self.rejected += 1;
                dt = dt_try * (0.9 * en.powf(-0.2)).max(0.2);
                continue;
            }

            if !self.valid(vars, &step.y) {
                return PhaseEnd::Event(self.locate_event(vars, t, &y, &dy, dt_try));
            }

            self.accepted += 1;
            self.error_estimate += vars.h_error(&step.err, &step.y);
            y = step.y;
            if clamped {
                t = stop_t;
                r = stop_r;
                dy = f(t, &y);
            } else {
                t += dt_try;
                r = vars.radius(t);
                dy = step.dy;
            }
            self.samples.push(vars.sample(r, &y));
            if clamped {
                if let Some(k) = checkpoint {
                    self.checkpoints.push(Checkpoint { sample: self.samples.len() - 1, grid: k });
                }
            }

            // PI controller
            let en_c = en.max(1e-10);
            let fac = (0.9 * en_c.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0);
            err_prev = en_c;
            let proposal = dt_try * fac;
            // a step shortened to land on a stop says little about the
            // step size the solution allows; keep the unclamped proposal
            dt = if clamped && dt_try < dt { proposal.max(dt) } else { proposal };
        }
        PhaseEnd::Done { dt }
    }

    /// Bisects the step length until the event radius is known to 1e-6
    /// relative, storing the last admissible state.
    fn locate_event(&mut self, vars: Vars, t: f64, y: &State, dy: &State, dt_bad: f64) -> Termination {
        let p = self.params;
        let f = |t: f64, y: &State| vars.rhs(p, t, y);
        let (mut lo, mut hi) = (0.0, dt_bad);
        let mut good: Option<State> = None;
        let mut bad_y = dopri5_step(&f, t, y, dy, dt_bad).y;
        loop {
            let width = match vars {
                Vars::Radial => (hi - lo) / (t + hi),
                Vars::Log => hi - lo,
            };
            if width <= 1e-6 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let trial = dopri5_step(&f, t, y, dy, mid).y;
            if self.valid(vars, &trial) {
                lo = mid;
                good = Some(trial);
            } else {
                hi = mid;
                bad_y = trial;
            }
        }
        if let Some(g) = good {
            self.accepted += 1;
            self.samples.push(vars.sample(vars.radius(t + lo), &g));
        }
        let r_event = vars.radius(t + hi);
        if bad_y[0].is_finite() && bad_y[1].is_finite() {
            self.event_at(vars, &bad_y, r_event)
        } else {
            Termination::PositivityLoss(r_event)
        }
    }
}

/// Integrates from the seed's handoff radius to `config.r_max`.
///
/// The part of the trajectory on `[0, r_seed]` (the origin, checkpoints in
/// `[r_seed/100, r_seed)`, extra stops below `r_seed`, and `r_seed` itself)
/// comes from the seed evaluator.
pub fn integrate(params: &SolitonParams, seed: &dyn Seed, config: &IntegratorConfig) -> Result<Trajectory> {
    let r_seed = seed.handoff_radius();
    config.validate(r_seed)?;
    if !(r_seed > 0.0) {
        return Err(SolitonError::InvalidParams(format!("seed radius must be positive, got {r_seed}")));
    }

    let mut stops: Vec<f64> = config.extra_stops.iter().copied().filter(|x| x.is_finite() && *x > 0.0).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    // seeded portion
    let mut seeded: Vec<(f64, Option<i64>)> = vec![(0.0, None)];
    let mut k = checkpoint_index_above(r_seed / 100.0, false);
    while checkpoint_radius(k) < r_seed {
        seeded.push((checkpoint_radius(k), Some(k)));
        k += 1;
    }
    seeded.extend(stops.iter().filter(|&&x| x < r_seed).map(|&x| (x, None)));
    seeded.push((r_seed, None));
    seeded.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.is_some().cmp(&a.1.is_some())));
    seeded.dedup_by(|a, b| a.0 == b.0);

    let mut samples = Vec::with_capacity(seeded.len() + 1024);
    let mut checkpoints = Vec::new();
    for (r, grid) in seeded {
        let (h, hr) = if r == 0.0 { (1.0, params.mu1) } else { seed.eval(r)? };
        if !(h > 0.0) {
            return Err(SolitonError::Domain(format!("seed produced h = {h} at r = {r}")));
        }
        samples.push(SolutionSample { r, h, hr });
        if let Some(k) = grid {
            checkpoints.push(Checkpoint { sample: samples.len() - 1, grid: k });
        }
    }

    let mut run = Run {
        params,
        config,
        stops,
        samples,
        checkpoints,
        error_estimate: 0.0,
        accepted: 0,
        rejected: 0,
    };

    let switch = config.log_switch_radius.max(r_seed);
    let radial_end = config.r_max.min(switch);
    let mut termination = Termination::ReachedRMax;
    let dt0 = 1e-3 * r_seed;
    match run.phase(Vars::Radial, radial_end, dt0) {
        PhaseEnd::Event(ev) => termination = ev,
        PhaseEnd::Done { dt } => {
            if radial_end < config.r_max {
                if let PhaseEnd::Event(ev) = run.phase(Vars::Log, config.r_max, dt / radial_end) {
                    termination = ev;
                }
            }
        }
    }

    Ok(Trajectory {
        params: *params,
        samples: run.samples,
        checkpoints: run.checkpoints,
        seed_radius: r_seed,
        seeder: seed.kind(),
        termination,
        error_estimate: run.error_estimate,
        accepted_steps: run.accepted,
        rejected_steps: run.rejected,
    })
}

/// Outcome of a run inside the guaranteed window of a shrinking soliton.
#[derive(Debug, Clone)]
pub struct NegativeLambdaRun {
    pub trajectory: Trajectory,
    /// `0.99 (n-1) / |lambda|`
    pub r_target: f64,
    /// `(n-1) / |lambda|`
    pub r_critical: f64,
    /// The target was reached with `0 < h < growth_guard` and no earlier event.
    pub reached_target: bool,
    /// The run also got past `r_critical` (informational).
    pub continued_past_critical: bool,
}

/// Integrates a `lambda < 0` profile towards `0.99 (n-1)/|lambda|`, continuing
/// to `config.r_max` when that is further out.
pub fn integrate_negative_lambda(
    params: &SolitonParams,
    seed: &dyn Seed,
    config: &IntegratorConfig,
) -> Result<NegativeLambdaRun> {
    if !(params.lambda < 0.0) {
        return Err(SolitonError::InvalidParams(format!(
            "integrate_negative_lambda needs lambda < 0, got {}",
            params.lambda
        )));
    }
    let r_critical = params.nm1() / params.lambda.abs();
    let r_target = 0.99 * r_critical;
    let mut cfg = config.clone();
    cfg.r_max = cfg.r_max.max(r_target);
    cfg.extra_stops.push(r_target);
    let trajectory = integrate(params, seed, &cfg)?;

    let event_before = trajectory.termination.event_radius().is_some_and(|r| r < r_target);
    let at_target = trajectory.samples.iter().find(|s| s.r == r_target);
    let reached_target = !event_before
        && at_target.is_some_and(|s| s.h > 0.0 && s.h < cfg.growth_guard && s.h.is_finite());
    let continued_past_critical = trajectory.r_end() > r_critical;
    Ok(NegativeLambdaRun { trajectory, r_target, r_critical, reached_target, continued_past_critical })
}

/// Relative residual of the closed integral representation of `h_r`,
///
/// ```text
/// h_r(r) = (n-1)/r + lambda + sqrt(h(r)/h(r1)) (h_r(r1) - (n-1)/r1 - lambda)
///          + (n-1) sqrt(h(r))/2 * int_{r1}^{r} (h+1)/(rho^2 sqrt(h)) drho,
/// ```
///
/// evaluated by quadrature over the interpolated trajectory, normalised by
/// `max(1, |h_r(r)|)`.
pub fn residual_integral_identity(traj: &Trajectory, r1: f64, r: f64) -> Result<f64> {
    if !(r1 > 0.0 && r1 < r) {
        return Err(SolitonError::Domain(format!("need 0 < r1 < r, got r1 = {r1}, r = {r}")));
    }
    if r > traj.r_end() {
        return Err(SolitonError::Domain(format!(
            "[{r1}, {r}] is not covered by the trajectory (ends at {})",
            traj.r_end()
        )));
    }
    let p = &traj.params;
    let nm1 = p.nm1();
    let interp = ProfileInterpolant::new(traj);
    let (h1, hr1) = interp.eval(r1)?;
    let (h, hr) = interp.eval(r)?;

    let integrand = |x: f64| {
        let (hx, _) = interp.eval(x).unwrap_or((f64::NAN, f64::NAN));
        (hx + 1.0) / (x * x * hx.sqrt())
    };
    let mut knots: Vec<f64> = vec![r1];
    knots.extend(interp.knots().filter(|&x| x > r1 && x < r));
    knots.push(r);
    let integral: f64 = knots.windows(2).map(|w| adaptive_quad(&integrand, w[0], w[1], 1e-12)).sum();

    let rhs = nm1 / r + p.lambda + (h / h1).sqrt() * (hr1 - nm1 / r1 - p.lambda) + nm1 * 0.5 * h.sqrt() * integral;
    Ok((rhs - hr).abs() / hr.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32, lambda: f64, mu1: f64) -> SolitonParams {
        SolitonParams::new(n, lambda, mu1).unwrap()
    }

    #[test]
    fn exact_expanding_solution_is_reproduced() {
        let prm = p(3, 1.0, 1.0 / 3.0);
        let t = solve(&prm, SeederKind::Series, &IntegratorConfig::with_r_max(100.0)).unwrap();
        assert_eq!(t.termination, Termination::ReachedRMax);
        assert_eq!(t.r_end(), 100.0);
        let rel = (t.last().h - (1.0 + 100.0 / 3.0)).abs() / (1.0 + 100.0 / 3.0);
        assert!(rel <= 1e-8, "{rel}");
        for s in &t.samples {
            let exact = 1.0 + s.r / 3.0;
            assert!((s.h - exact).abs() <= 1e-8 * exact, "r={} h={}", s.r, s.h);
        }
    }

    #[test]
    fn stationary_solution_is_preserved_exactly() {
        let t = solve(&p(3, 0.0, 0.0), SeederKind::Series, &IntegratorConfig::with_r_max(1e6)).unwrap();
        assert!(t.reached_r_max());
        assert!(t.samples.iter().all(|s| s.h == 1.0 && s.hr == 0.0));
    }

    #[test]
    fn steady_negative_slope_stays_in_band() {
        let t = solve(&p(3, 0.0, -1.0), SeederKind::Series, &IntegratorConfig::with_r_max(1e6)).unwrap();
        assert!(t.reached_r_max(), "{:?}", t.termination);
        for s in t.interior() {
            assert!(s.h > 0.0 && s.h < 1.0 && s.hr < 0.0, "{s:?}");
        }
    }

    #[test]
    fn checkpoints_sit_exactly_on_the_grid() {
        let t = solve(&p(2, 0.5, 0.3), SeederKind::Series, &IntegratorConfig::with_r_max(1e4)).unwrap();
        assert!(t.reached_r_max());
        let mut last = i64::MIN;
        for (k, s) in t.checkpoint_samples() {
            assert_eq!(s.r, checkpoint_radius(k));
            assert!(k > last);
            last = k;
        }
        // every grid point between the first seeded checkpoint and r_max
        let first = t.checkpoints[0].grid;
        assert_eq!(last - first + 1, t.checkpoints.len() as i64);
        assert_eq!(last, 4 * 64);
        assert!(t.samples.windows(2).all(|w| w[0].r < w[1].r));
    }

    #[test]
    fn stop_next_to_checkpoint() {
        // 10^-0.5 from the checkpoint grid and from a product differ by an ulp
        let p = SolitonParams::new(3, 0.0, -1.0).unwrap();
        let mut cfg = IntegratorConfig::with_r_max(1e3);
        let rk = checkpoint_radius(-32);
        cfg.extra_stops = vec![f64::from_bits(rk.to_bits() + 1), 10.0 * 10f64.powf(-1.5)];
        let t = solve(&p, SeederKind::Series, &cfg).unwrap();
        assert_eq!(t.termination, Termination::ReachedRMax);
        for x in &cfg.extra_stops {
            assert!(t.samples.iter().any(|s| s.r == *x));
        }
    }

    #[test]
    fn extra_stops_are_hit() {
        let mut cfg = IntegratorConfig::with_r_max(50.0);
        cfg.extra_stops = vec![1e-5, 0.123, 7.77];
        let t = solve(&p(3, 0.0, 1.0), SeederKind::Series, &cfg).unwrap();
        for x in [1e-5, 0.123, 7.77] {
            assert!(t.samples.iter().any(|s| s.r == x), "missing {x}");
        }
    }

    #[test]
    fn growth_guard_terminates_super_critical_runs() {
        let t = solve(&p(3, 1.0, 0.5), SeederKind::Series, &IntegratorConfig::with_r_max(1e6)).unwrap();
        match t.termination {
            Termination::GrowthGuard(r) => {
                assert!(r > 1.0 && r < 1e6);
                assert!(t.last().h <= 1e12 && t.last().h > 1e11);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shrinking_windows() {
        let cfg = IntegratorConfig::with_r_max(1.0);
        for (n, lambda, mu1, target) in [(3, -1.0, -0.5, 1.98), (3, -1.0, 0.0, 1.98), (4, -2.0, 0.3, 1.485)] {
            let prm = p(n, lambda, mu1);
            let seed = compute_coefficients(&prm, DEFAULT_ORDER).unwrap();
            let run = integrate_negative_lambda(&prm, &seed, &cfg).unwrap();
            assert!((run.r_target - target).abs() < 1e-12);
            assert!(run.reached_target, "{n} {lambda} {mu1}: {:?}", run.trajectory.termination);
        }
    }

    #[test]
    fn positive_lambda_is_rejected_by_window_run() {
        let prm = p(3, 1.0, 0.1);
        let seed = compute_coefficients(&prm, DEFAULT_ORDER).unwrap();
        assert!(integrate_negative_lambda(&prm, &seed, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn identity_residual_examples() {
        let exact = solve(&p(3, 1.0, 1.0 / 3.0), SeederKind::Series, &IntegratorConfig::with_r_max(100.0)).unwrap();
        assert!(residual_integral_identity(&exact, 1.0, 10.0).unwrap() <= 1e-8);
        let flat = solve(&p(3, 0.0, 0.0), SeederKind::Series, &IntegratorConfig::with_r_max(100.0)).unwrap();
        assert!(residual_integral_identity(&flat, 1.0, 50.0).unwrap() <= 1e-12);
        let steady = solve(&p(3, 0.0, -1.0), SeederKind::Series, &IntegratorConfig::with_r_max(1e4)).unwrap();
        assert!(residual_integral_identity(&steady, 10.0, 1000.0).unwrap() <= 1e-6);
        assert!(residual_integral_identity(&steady, 10.0, 1e5).is_err());
        assert!(residual_integral_identity(&steady, 10.0, 5.0).is_err());
    }

    #[test]
    fn seeders_agree_and_all_three_modes_integrate() {
        let prm = p(3, 1.0, 0.2);
        let cfg = IntegratorConfig::with_r_max(10.0);
        let a = solve(&prm, SeederKind::Series, &cfg).unwrap();
        let b = solve(&prm, SeederKind::Picard, &cfg).unwrap();
        let c = solve(&prm, SeederKind::Both, &cfg).unwrap();
        assert_eq!(c.seeder, SeederKind::Both);
        assert!((a.last().h - b.last().h).abs() < 1e-8 * a.last().h);
        assert_eq!(a.last().h, c.last().h);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let prm = p(3, 0.0, -1.0);
        let mut cfg = IntegratorConfig::with_r_max(1e-9);
        assert!(solve(&prm, SeederKind::Series, &cfg).is_err());
        cfg = IntegratorConfig { rel_tol: 0.0, ..IntegratorConfig::default() };
        assert!(solve(&prm, SeederKind::Series, &cfg).is_err());
    }
}
