//! Fixed-point seeding near the origin.
//!
//! With `w = h_r`, a solution on `[0, eps]` is a fixed point of
//!
//! ```text
//! Phi_1(h, w)(r) = 1 + int_0^r w
//! Phi_2(h, w)(r) = mu1 + int_0^r E(w, s) / (2 h(s)) ds
//! E(w, s) = (n-1) s^-2 (int_0^s w)^2 + (n-1) s^-2 int_0^s (w(rho) - w(s)) drho
//!           + w(s)^2 - lambda w(s)
//! ```
//!
//! For `eps <= eps2` the map contracts by `26/33` in the norm
//! `max(sup|h|, Lip h, sup|w|, Lip w)`. Pairs are stored on a uniform grid and
//! every integral is a composite trapezoid.

use serde::Serialize;

use crate::error::{Result, SolitonError};
use crate::model::SolitonParams;

pub const DEFAULT_GRID: usize = 4096;
pub const CONTRACTION_BOUND: f64 = 26.0 / 33.0;

/// Differences below this are round-off; ratios built on them are not recorded.
const RATIO_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionConstants {
    pub eps1: f64,
    pub eps2: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `K = n(|mu1|+1)^2 + |lambda|(|mu1|+1)`, the scale of every bound on `w`.
fn growth_scale(params: &SolitonParams) -> f64 {
    let m = params.mu1.abs() + 1.0;
    params.n as f64 * m * m + params.lambda.abs() * m
}

pub fn contraction_epsilon(params: &SolitonParams) -> ContractionConstants {
    let k = growth_scale(params);
    let m = params.mu1.abs() + 1.0;
    let eps1 = 1.0 / (100.0 * k);
    let c1 = 5.5 * k;
    let c2 = (params.n as f64 + 1.0) * m + params.lambda.abs() + 5000.0 / (99.0 * 99.0) * c1;
    let eps2 = eps1.min(1.0 / (33.0 * c2));
    ContractionConstants { eps1, eps2, c1, c2 }
}

/// A pair `(h, w)` sampled at `M + 1` uniform nodes of `[0, eps]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunctionPair {
    pub eps: f64,
    pub h_vals: Vec<f64>,
    pub w_vals: Vec<f64>,
}

impl GridFunctionPair {
    /// The centre of the closed set: `h = 1`, `w = mu1`.
    pub fn initial(params: &SolitonParams, eps: f64, intervals: usize) -> Self {
        Self {
            eps,
            h_vals: vec![1.0; intervals + 1],
            w_vals: vec![params.mu1; intervals + 1],
        }
    }

    pub fn intervals(&self) -> usize {
        self.h_vals.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        self.eps / self.intervals() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        // exact at both ends
        if i == self.intervals() {
            self.eps
        } else {
            self.eps * i as f64 / self.intervals() as f64
        }
    }

    /// Cubic Hermite interpolation of `h` (with `w` as its slope) and linear
    /// interpolation of `w` at `r` in `[0, eps]`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.eps).contains(&r) {
            return Err(SolitonError::Domain(format!(
                "picard pair evaluated at r = {r}, outside [0, {}]",
                self.eps
            )));
        }
        let dx = self.spacing();
        let i = ((r / dx).floor() as usize).min(self.intervals() - 1);
        let x0 = self.node(i);
        let t = ((r - x0) / dx).clamp(0.0, 1.0);
        let (h0, h1) = (self.h_vals[i], self.h_vals[i + 1]);
        let (w0, w1) = (self.w_vals[i], self.w_vals[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h = (2.0 * t3 - 3.0 * t2 + 1.0) * h0
            + (t3 - 2.0 * t2 + t) * dx * w0
            + (-2.0 * t3 + 3.0 * t2) * h1
            + (t3 - t2) * dx * w1;
        Ok((h, w0 + t * (w1 - w0)))
    }
}

fn cumulative_trapezoid(f: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in f.windows(2) {
        acc += 0.5 * dx * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}

struct PhiImage {
    h: Vec<f64>,
    w: Vec<f64>,
    /// `E(w, s) / (2 h(s))` at the nodes, the integrand that produced `w`.
    integrand: Vec<f64>,
    /// `w_{i+1} - w_i` as added by the trapezoid rule.
    w_increments: Vec<f64>,
}

/// `w_increments`, when known, must equal `w_{i+1} - w_i`; passing them keeps
/// the `s^-2` terms free of the round-off that differencing stored values adds.
fn phi_image(
    params: &SolitonParams,
    pair: &GridFunctionPair,
    w_increments: Option<&[f64]>,
) -> Result<PhiImage> {
    let m = pair.intervals();
    if m < 2 {
        return Err(SolitonError::InvalidParams(format!("picard grid needs >= 2 intervals, got {m}")));
    }
    if let Some((index, &value)) = pair.h_vals.iter().enumerate().find(|(_, &h)| !(h > 0.5)) {
        return Err(SolitonError::Positivity { index, value });
    }
    let dx = pair.spacing();
    let nm1 = params.nm1();
    let w = &pair.w_vals;
    let big_w = cumulative_trapezoid(w, dx);
    // G_i = int_0^{s_i} (w - w_i), accumulated as
    // G_{i+1} = G_i - (s_i + dx/2)(w_{i+1} - w_i); forming W_i - s_i w_i
    // directly loses everything to cancellation once divided by s^2.
    let mut g = vec![0.0; m + 1];
    for i in 0..m {
        let dw = match w_increments {
            Some(d) => d[i],
            None => w[i + 1] - w[i],
        };
        g[i + 1] = g[i] - (pair.node(i) + 0.5 * dx) * dw;
    }

    // the two s^-2 terms of E
    let singular = |i: usize| {
        let s = pair.node(i);
        let mean = big_w[i] / s;
        nm1 * (mean * mean + g[i] / (s * s))
    };
    let mut integrand = vec![0.0; m + 1];
    for i in 1..=m {
        let e = singular(i) + w[i] * w[i] - params.lambda * w[i];
        integrand[i] = e / (2.0 * pair.h_vals[i]);
    }
    let t0 = 2.0 * singular(1) - singular(2);
    integrand[0] = (t0 + w[0] * w[0] - params.lambda * w[0]) / (2.0 * pair.h_vals[0]);

    let mut h = big_w;
    h.iter_mut().for_each(|x| *x += 1.0);
    let w_increments: Vec<f64> = integrand.windows(2).map(|f| 0.5 * dx * (f[0] + f[1])).collect();
    let mut w_new = Vec::with_capacity(m + 1);
    let mut acc = params.mu1;
    w_new.push(acc);
    for d in &w_increments {
        acc += d;
        w_new.push(acc);
    }
    Ok(PhiImage { h, w: w_new, integrand, w_increments })
}

/// One application of the fixed-point map.
pub fn apply_phi(params: &SolitonParams, pair: &GridFunctionPair) -> Result<GridFunctionPair> {
    let img = phi_image(params, pair, None)?;
    Ok(GridFunctionPair { eps: pair.eps, h_vals: img.h, w_vals: img.w })
}

fn sup(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |a, x| a.max(x.abs()))
}

fn lipschitz(v: &[f64], dx: f64) -> f64 {
    sup(v.windows(2).map(|p| (p[1] - p[0]) / dx))
}

/// Discrete norm `max(sup|h|, Lip h, sup|w|, Lip w)` of the difference `a - b`.
pub fn distance(a: &GridFunctionPair, b: &GridFunctionPair) -> f64 {
    let dx = a.spacing();
    let dh: Vec<f64> = a.h_vals.iter().zip(&b.h_vals).map(|(x, y)| x - y).collect();
    let dw: Vec<f64> = a.w_vals.iter().zip(&b.w_vals).map(|(x, y)| x - y).collect();
    sup(dh.iter().copied())
        .max(lipschitz(&dh, dx))
        .max(sup(dw.iter().copied()))
        .max(lipschitz(&dw, dx))
}

/// Bounds of the closed set that the map preserves, checked on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedSetBounds {
    pub h_sup: f64,
    pub h_lip: f64,
    pub w_sup: f64,
    pub w_lip: f64,
}

pub fn closed_set_bounds(params: &SolitonParams, eps: f64) -> ClosedSetBounds {
    let m = params.mu1.abs() + 1.0;
    let k3 = 3.0 * growth_scale(params);
    ClosedSetBounds { h_sup: m * eps, h_lip: m, w_sup: k3 * eps, w_lip: k3 }
}

/// Names of the closed-set conditions that `pair` violates (empty when inside).
pub fn closed_set_violations(params: &SolitonParams, pair: &GridFunctionPair) -> Vec<&'static str> {
    const SLACK: f64 = 1.0 + 1e-9;
    let b = closed_set_bounds(params, pair.eps);
    let dx = pair.spacing();
    let mut out = Vec::new();
    if pair.h_vals[0] != 1.0 {
        out.push("h(0) = 1");
    }
    if pair.w_vals[0] != params.mu1 {
        out.push("w(0) = mu1");
    }
    if sup(pair.h_vals.iter().map(|h| h - 1.0)) > b.h_sup * SLACK {
        out.push("sup|h - 1|");
    }
    if lipschitz(&pair.h_vals, dx) > b.h_lip * SLACK {
        out.push("Lip h");
    }
    if sup(pair.w_vals.iter().map(|w| w - params.mu1)) > b.w_sup * SLACK {
        out.push("sup|w - mu1|");
    }
    if lipschitz(&pair.w_vals, dx) > b.w_lip * SLACK {
        out.push("Lip w");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardConfig {
    /// Number of grid intervals `M`.
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID, tol: 1e-12, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardReport {
    pub eps_used: f64,
    pub eps2: f64,
    /// Set when `eps > eps2`; no contraction is claimed then.
    pub exploratory: bool,
    pub iterations: usize,
    /// Distance between the last two iterates.
    pub final_residual: f64,
    /// `d_{k+1} / d_k` for consecutive-iterate distances above round-off.
    pub empirical_ratios: Vec<f64>,
    /// Iterates that left the closed set, counted over the whole run.
    pub closed_set_violations: usize,
}

/// Iterates the map from `(1, mu1)` until consecutive iterates are within `tol`.
pub fn picard_solve(
    params: &SolitonParams,
    eps: f64,
    config: &PicardConfig,
) -> Result<(GridFunctionPair, PicardReport)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(SolitonError::InvalidParams(format!("picard interval must be positive, got {eps}")));
    }
    let eps2 = contraction_epsilon(params).eps2;
    let exploratory = eps > eps2 * (1.0 + 1e-12);

    let mut current = GridFunctionPair::initial(params, eps, config.grid);
    let mut prev_integrand: Option<Vec<f64>> = None;
    let mut prev_w: Vec<f64> = current.w_vals.clone();
    let mut prev_dist: Option<f64> = None;
    let mut increments: Option<Vec<f64>> = None;
    let mut ratios = Vec::new();
    let mut violations = 0;

    for iter in 1..=config.max_iter {
        let img = phi_image(params, &current, increments.as_deref())?;
        let next = GridFunctionPair { eps, h_vals: img.h, w_vals: img.w };

        let dist = match &prev_integrand {
            None => distance(&next, &current),
            Some(prev_f) => {
                // Lipschitz quotients of the differences straight from the
                // integrands; dividing differenced cumulative sums by dx
                // would amplify round-off by 1/dx.
                let dh_lip = sup(current
                    .w_vals
                    .windows(2)
                    .zip(prev_w.windows(2))
                    .map(|(a, b)| 0.5 * ((a[0] - b[0]) + (a[1] - b[1]))));
                let dw_lip = sup(img
                    .integrand
                    .windows(2)
                    .zip(prev_f.windows(2))
                    .map(|(a, b)| 0.5 * ((a[0] - b[0]) + (a[1] - b[1]))));
                let dh_sup = sup(next.h_vals.iter().zip(&current.h_vals).map(|(a, b)| a - b));
                let dw_sup = sup(next.w_vals.iter().zip(&current.w_vals).map(|(a, b)| a - b));
                dh_sup.max(dh_lip).max(dw_sup).max(dw_lip)
            }
        };

        if !closed_set_violations(params, &next).is_empty() {
            violations += 1;
        }
        if let Some(pd) = prev_dist {
            if pd > RATIO_FLOOR {
                ratios.push(dist / pd);
            }
        }

        if dist <= config.tol {
            let report = PicardReport {
                eps_used: eps,
                eps2,
                exploratory,
                iterations: iter,
                final_residual: dist,
                empirical_ratios: ratios,
                closed_set_violations: violations,
            };
            return Ok((next, report));
        }
        if !dist.is_finite() {
            return Err(SolitonError::NoConvergence { iterations: iter, residual: dist });
        }

        prev_w = std::mem::replace(&mut current, next).w_vals;
        prev_integrand = Some(img.integrand);
        increments = Some(img.w_increments);
        prev_dist = Some(dist);
    }
    Err(SolitonError::NoConvergence {
        iterations: config.max_iter,
        residual: prev_dist.unwrap_or(f64::NAN),
    })
}

/// Largest measured consecutive-difference ratio.
pub fn empirical_contraction_ratio(report: &PicardReport) -> Result<f64> {
    if report.iterations < 3 || report.empirical_ratios.is_empty() {
        return Err(SolitonError::InsufficientIterations(report.iterations));
    }
    Ok(report.empirical_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32, lambda: f64, mu1: f64) -> SolitonParams {
        SolitonParams::new(n, lambda, mu1).unwrap()
    }

    #[test]
    fn epsilon_constants_for_flat_start() {
        let c = contraction_epsilon(&p(2, 0.0, 0.0));
        assert_eq!(c.eps1, 1.0 / 200.0);
        assert_eq!(c.c1, 11.0);
        // (n+1)(|mu1|+1) = 3 for n = 2
        let c2 = 3.0 + 5000.0 * 11.0 / 9801.0;
        assert!((c.c2 - c2).abs() < 1e-14);
        assert!((c.c2 - 8.6116).abs() < 1e-4);
        assert!((c.eps2 - 1.0 / (33.0 * c2)).abs() < 1e-17);
        assert!((c.eps2 - 3.5189e-3).abs() < 1e-7);

        let c = contraction_epsilon(&p(3, 1.0, 0.0));
        assert_eq!(c.eps1, 1.0 / 400.0);
    }

    #[test]
    fn constant_pair_image() {
        let mu = -0.8;
        let prm = p(3, 0.0, mu);
        let pair = GridFunctionPair::initial(&prm, 1e-3, 64);
        let img = apply_phi(&prm, &pair).unwrap();
        for i in 0..=64 {
            let r = pair.node(i);
            assert!((img.h_vals[i] - (1.0 + mu * r)).abs() < 1e-15);
            let expect = mu + 1.5 * mu * mu * r;
            assert!((img.w_vals[i] - expect).abs() < 1e-14, "{} vs {expect}", img.w_vals[i]);
        }
    }

    #[test]
    fn flat_pair_is_fixed() {
        let prm = p(4, 2.0, 0.0);
        let pair = GridFunctionPair::initial(&prm, 1e-3, 32);
        let img = apply_phi(&prm, &pair).unwrap();
        assert!(img.h_vals.iter().all(|&h| h == 1.0));
        assert!(img.w_vals.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn linear_expanding_profile_is_nearly_fixed() {
        let prm = p(3, 1.0, 1.0 / 3.0);
        let eps = contraction_epsilon(&prm).eps2;
        let m = 256;
        let pair = GridFunctionPair {
            eps,
            h_vals: (0..=m).map(|i| 1.0 + eps * i as f64 / m as f64 / 3.0).collect(),
            w_vals: vec![1.0 / 3.0; m + 1],
        };
        let img = apply_phi(&prm, &pair).unwrap();
        let d = distance(&img, &pair);
        assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn low_h_is_rejected() {
        let prm = p(3, 1.0, 1.0);
        let mut pair = GridFunctionPair::initial(&prm, 1e-3, 16);
        pair.h_vals[5] = 0.4;
        assert!(matches!(apply_phi(&prm, &pair), Err(SolitonError::Positivity { index: 5, .. })));
    }

    #[test]
    fn zero_slope_converges_in_one_iteration() {
        let prm = p(3, 1.0, 0.0);
        let eps = contraction_epsilon(&prm).eps2;
        let (pair, report) = picard_solve(&prm, eps, &PicardConfig::default()).unwrap();
        assert_eq!(report.iterations, 1);
        assert_eq!(report.final_residual, 0.0);
        assert!(pair.h_vals.iter().all(|&h| h == 1.0));
        assert!(matches!(
            empirical_contraction_ratio(&report),
            Err(SolitonError::InsufficientIterations(1))
        ));
    }

    #[test]
    fn exact_expanding_solution_is_recovered() {
        let prm = p(3, 1.0, 1.0 / 3.0);
        let eps = contraction_epsilon(&prm).eps2;
        let (pair, report) = picard_solve(&prm, eps, &PicardConfig::default()).unwrap();
        assert!(!report.exploratory);
        for i in 0..=pair.intervals() {
            let r = pair.node(i);
            assert!((pair.h_vals[i] - (1.0 + r / 3.0)).abs() <= 1e-10);
        }
    }

    #[test]
    fn contraction_ratio_within_bound() {
        let prm = p(4, 1.0, -1.0);
        let eps = contraction_epsilon(&prm).eps2;
        let (_, report) = picard_solve(&prm, eps, &PicardConfig::default()).unwrap();
        let ratio = empirical_contraction_ratio(&report).unwrap();
        assert!(ratio <= CONTRACTION_BOUND + 0.05, "{ratio}");
        assert_eq!(report.closed_set_violations, 0);
    }

    #[test]
    fn exploratory_runs_are_flagged() {
        let prm = p(3, 0.0, -1.0);
        let eps = 10.0 * contraction_epsilon(&prm).eps2;
        let (_, report) = picard_solve(&prm, eps, &PicardConfig { grid: 512, ..Default::default() }).unwrap();
        assert!(report.exploratory);
    }

    #[test]
    fn iteration_budget_exhaustion_is_reported() {
        let prm = p(3, 0.0, -1.0);
        let eps = contraction_epsilon(&prm).eps2;
        let cfg = PicardConfig { grid: 128, tol: 1e-14, max_iter: 3 };
        assert!(matches!(picard_solve(&prm, eps, &cfg), Err(SolitonError::NoConvergence { iterations: 3, .. })));
    }

    #[test]
    fn hermite_eval_reproduces_nodes() {
        let prm = p(2, 0.0, -1.0);
        let eps = contraction_epsilon(&prm).eps2;
        let (pair, _) = picard_solve(&prm, eps, &PicardConfig { grid: 256, ..Default::default() }).unwrap();
        for i in [0, 1, 100, 256] {
            let (h, w) = pair.eval(pair.node(i)).unwrap();
            assert!((h - pair.h_vals[i]).abs() < 1e-15);
            assert!((w - pair.w_vals[i]).abs() < 1e-15);
        }
        assert!(pair.eval(2.0 * eps).is_err());
    }
}
