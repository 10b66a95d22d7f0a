//! Metric-level quantities of the soliton `g = da^2 / h(a^2) + a^2 dsigma`.
//!
//! The geodesic distance from the tip is `t(a) = int_0^a drho / sqrt(h(rho^2))`;
//! the radial and orbital sectional curvatures are `-h_r(a^2)` and
//! `(1 - h(a^2)) / a^2`.

use serde::Serialize;

use crate::error::{Result, SolitonError};
use crate::interp::{adaptive_quad, ProfileInterpolant};
use crate::model::Trajectory;

const QUAD_TOL: f64 = 1e-13;

/// Cumulative `t(a)` at the square roots of the trajectory sample radii.
pub struct GeodesicTable<'a> {
    interp: ProfileInterpolant<'a>,
    a_knots: Vec<f64>,
    t_knots: Vec<f64>,
}

impl<'a> GeodesicTable<'a> {
    /// Tabulates `t` on `[0, a_max]`.
    pub fn new(traj: &'a Trajectory, a_max: f64) -> Result<Self> {
        let interp = ProfileInterpolant::new(traj);
        if !(a_max >= 0.0) || a_max * a_max > interp.r_max() * (1.0 + 4.0 * f64::EPSILON) {
            return Err(SolitonError::OutOfRange(a_max));
        }
        let mut a_knots: Vec<f64> = interp.knots().map(f64::sqrt).take_while(|&a| a < a_max).collect();
        a_knots.push(a_max);
        let mut t_knots = Vec::with_capacity(a_knots.len());
        t_knots.push(0.0);
        let mut table = Self { interp, a_knots: Vec::new(), t_knots: Vec::new() };
        let mut acc = 0.0;
        for w in a_knots.windows(2) {
            acc += table.segment(w[0], w[1]);
            t_knots.push(acc);
        }
        table.a_knots = a_knots;
        table.t_knots = t_knots;
        Ok(table)
    }

    fn integrand(&self, rho: f64) -> f64 {
        match self.profile(rho) {
            Ok((h, _)) if h > 0.0 => 1.0 / h.sqrt(),
            _ => f64::NAN,
        }
    }

    fn segment(&self, a0: f64, a1: f64) -> f64 {
        adaptive_quad(&|x| self.integrand(x), a0, a1, QUAD_TOL)
    }

    pub fn a_max(&self) -> f64 {
        *self.a_knots.last().expect("table has at least one knot")
    }

    pub fn t(&self, a: f64) -> Result<f64> {
        if !(a >= 0.0 && a <= self.a_max()) {
            return Err(SolitonError::OutOfRange(a));
        }
        let i = self.a_knots.partition_point(|&x| x <= a).saturating_sub(1);
        if self.a_knots[i] == a {
            return Ok(self.t_knots[i]);
        }
        Ok(self.t_knots[i] + self.segment(self.a_knots[i], a))
    }

    /// `a(t)`, the inverse of [`Self::t`], by bisection on the monotone table.
    pub fn a_of_t(&self, t: f64) -> Result<f64> {
        let t_end = *self.t_knots.last().unwrap();
        if !(t >= 0.0 && t <= t_end) {
            return Err(SolitonError::OutOfRange(t));
        }
        let i = self.t_knots.partition_point(|&x| x <= t).saturating_sub(1);
        if i + 1 >= self.a_knots.len() {
            return Ok(self.a_max());
        }
        let (mut lo, mut hi) = (self.a_knots[i], self.a_knots[i + 1]);
        let base = self.t_knots[i];
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if base + self.segment(self.a_knots[i], mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `(h, h_r)` at `r = a^2`.
    pub fn profile(&self, a: f64) -> Result<(f64, f64)> {
        // sqrt(r)^2 may overshoot the last radius by an ulp
        self.interp.eval((a * a).min(self.interp.r_max()))
    }
}

/// `t(a)`; relative quadrature error well below 1e-8.
pub fn geodesic_distance(traj: &Trajectory, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(SolitonError::OutOfRange(a));
    }
    GeodesicTable::new(traj, a)?.t(a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricProfile {
    pub a_grid: Vec<f64>,
    pub t_of_a: Vec<f64>,
    /// `-h_r(a^2)`
    pub kappa_radial: Vec<f64>,
    /// `(1 - h(a^2)) / a^2`, with its limit `-mu1` at `a = 0`.
    pub kappa_orbital: Vec<f64>,
}

pub fn curvature_profile(traj: &Trajectory, a_grid: &[f64]) -> Result<MetricProfile> {
    if a_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SolitonError::InvalidParams("a_grid must be strictly increasing".into()));
    }
    if let Some(&bad) = a_grid.iter().find(|&&a| !(a >= 0.0)) {
        return Err(SolitonError::OutOfRange(bad));
    }
    let a_max = a_grid.last().copied().unwrap_or(0.0);
    let table = GeodesicTable::new(traj, a_max)?;
    let mut out = MetricProfile {
        a_grid: a_grid.to_vec(),
        t_of_a: Vec::with_capacity(a_grid.len()),
        kappa_radial: Vec::with_capacity(a_grid.len()),
        kappa_orbital: Vec::with_capacity(a_grid.len()),
    };
    for &a in a_grid {
        let (h, hr) = table.profile(a)?;
        out.t_of_a.push(table.t(a)?);
        out.kappa_radial.push(-hr);
        out.kappa_orbital.push(if a == 0.0 { -traj.params.mu1 } else { (1.0 - h) / (a * a) });
    }
    Ok(out)
}

/// Growth of `t(a)` towards the end of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Completeness {
    pub a_max: f64,
    pub t_at_rmax: f64,
    /// `log10(t(a_max) / t(a_max / 10))`: 1 for linear growth, 2 for quadratic.
    pub growth_exponent: f64,
    /// Mean slope of `t` over the last decade of `a` divided by the mean
    /// slope over the decade before.
    pub slope_ratio: f64,
    /// `t` keeps growing at least linearly: the mean slope did not drop by
    /// more than 10% from one decade to the next.
    pub diverging: bool,
}

pub fn completeness_diagnostic(traj: &Trajectory) -> Result<Completeness> {
    let r_end = traj.r_end();
    if r_end < 1e4 {
        return Err(SolitonError::WindowTooShort(format!(
            "completeness needs r >= 1e4, run ends at {r_end:e}"
        )));
    }
    let a = r_end.sqrt();
    let table = GeodesicTable::new(traj, a)?;
    let t2 = table.t(a)?;
    let t1 = table.t(a / 10.0)?;
    let t0 = table.t(a / 100.0)?;
    let slope_last = (t2 - t1) / (0.9 * a);
    let slope_prev = (t1 - t0) / (0.09 * a);
    let slope_ratio = slope_last / slope_prev;
    Ok(Completeness {
        a_max: a,
        t_at_rmax: t2,
        growth_exponent: (t2 / t1).log10(),
        slope_ratio,
        diverging: slope_ratio >= 0.9,
    })
}

/// Largest relative deviation between `a_t`, obtained by inverting `t(a)`
/// and differencing `a(t)`, and `sqrt(h(a^2))`, over checkpoints with
/// `a` in `[a_lo, a_hi]`.
pub fn inverse_consistency(traj: &Trajectory, a_lo: f64, a_hi: f64) -> Result<f64> {
    let table = GeodesicTable::new(traj, a_hi)?;
    let t_end = table.t(a_hi)?;
    let mut worst = 0.0f64;
    for (_, s) in traj.checkpoint_samples() {
        let a = s.r.sqrt();
        if a < a_lo || a > a_hi {
            continue;
        }
        let t = table.t(a)?;
        let dt = 1e-3 * t.min(t_end - t);
        if !(dt > 0.0) {
            continue;
        }
        let [am2, am1, ap1, ap2] = [-2.0, -1.0, 1.0, 2.0].map(|k| table.a_of_t(t + k * dt));
        let a_t = (am2? - 8.0 * am1? + 8.0 * ap1? - ap2?) / (12.0 * dt);
        let expected = s.h.sqrt();
        worst = worst.max((a_t - expected).abs() / expected);
    }
    Ok(worst)
}

/// Sign violations of the curvature table: both curvatures positive for
/// `mu1 < 0`, both negative for `mu1 > 0`, at every `a > 0` of the grid.
pub fn curvature_sign_violations(profile: &MetricProfile, mu1: f64) -> usize {
    profile
        .a_grid
        .iter()
        .zip(profile.kappa_radial.iter().zip(&profile.kappa_orbital))
        .filter(|(a, _)| **a > 0.0)
        .filter(|(_, (kr, ko))| {
            if mu1 < 0.0 {
                !(**kr > 0.0 && **ko > 0.0)
            } else if mu1 > 0.0 {
                !(**kr < 0.0 && **ko < 0.0)
            } else {
                false
            }
        })
        .count()
}
