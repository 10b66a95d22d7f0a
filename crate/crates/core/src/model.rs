//! Problem parameters, the profile ODE and the trajectory data model.
//!
//! The profile `h(r)` of a rotationally symmetric soliton with metric
//! `da^2 / h(a^2) + a^2 dsigma` on an `(n+1)`-manifold satisfies
//!
//! ```text
//! 2 r^2 h h_rr = (n-1) h (h-1) + r h_r (r h_r - lambda r - (n-1)),   h > 0,
//! h(0) = 1,  h_r(0) = mu1.
//! ```
//!
//! The equation is singular at `r = 0`; everything here assumes `r > 0`
//! and leaves the origin to the seeding modules.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SolitonError};

/// Number of log-uniform checkpoints per decade of `r`.
pub const CHECKPOINTS_PER_DECADE: i64 = 64;

/// Radius of checkpoint `k`, i.e. `10^(k/64)`.
pub fn checkpoint_radius(k: i64) -> f64 {
    10f64.powf(k as f64 / CHECKPOINTS_PER_DECADE as f64)
}

/// Smallest checkpoint index whose radius is `>= r` (strictly greater when `strict`).
pub fn checkpoint_index_above(r: f64, strict: bool) -> i64 {
    let mut k = (r.log10() * CHECKPOINTS_PER_DECADE as f64).floor() as i64 - 1;
    while checkpoint_radius(k) < r || (strict && checkpoint_radius(k) == r) {
        k += 1;
    }
    k
}

/// Exact rational copies of `lambda` and `mu1`, kept when the inputs were
/// given as rationals so that `mu1 == lambda / n` can be decided exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactParams {
    pub lambda: Ratio<i64>,
    pub mu1: Ratio<i64>,
}

/// The triple `(n, lambda, mu1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    /// Sphere dimension; the metric lives on an `(n+1)`-manifold.
    pub n: u32,
    pub lambda: f64,
    /// Initial slope `h_r(0)`.
    pub mu1: f64,
    #[serde(skip)]
    pub exact: Option<ExactParams>,
}

impl SolitonParams {
    pub fn new(n: u32, lambda: f64, mu1: f64) -> Result<Self> {
        if n < 2 {
            return Err(SolitonError::InvalidParams(format!("n must be >= 2, got {n}")));
        }
        if !lambda.is_finite() || !mu1.is_finite() {
            return Err(SolitonError::InvalidParams(format!(
                "lambda and mu1 must be finite, got lambda={lambda}, mu1={mu1}"
            )));
        }
        Ok(Self { n, lambda, mu1, exact: None })
    }

    /// Builds parameters from exact rationals; the float fields are their nearest doubles.
    pub fn from_rationals(n: u32, lambda: Ratio<i64>, mu1: Ratio<i64>) -> Result<Self> {
        let mut p = Self::new(n, ratio_to_f64(lambda), ratio_to_f64(mu1))?;
        p.exact = Some(ExactParams { lambda, mu1 });
        Ok(p)
    }

    pub fn with_mu1(&self, mu1: f64) -> Self {
        Self { mu1, exact: None, ..*self }
    }

    /// `n - 1` as a float, the coefficient that shows up everywhere.
    #[inline]
    pub fn nm1(&self) -> f64 {
        (self.n - 1) as f64
    }
}

pub(crate) fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionSample {
    pub r: f64,
    pub h: f64,
    pub hr: f64,
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "r")]
pub enum Termination {
    ReachedRMax,
    PositivityLoss(f64),
    GrowthGuard(f64),
    StepUnderflow(f64),
}

impl Termination {
    pub fn event_radius(&self) -> Option<f64> {
        match *self {
            Termination::ReachedRMax => None,
            Termination::PositivityLoss(r)
            | Termination::GrowthGuard(r)
            | Termination::StepUnderflow(r) => Some(r),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::ReachedRMax => "ReachedRMax",
            Termination::PositivityLoss(_) => "PositivityLoss",
            Termination::GrowthGuard(_) => "GrowthGuard",
            Termination::StepUnderflow(_) => "StepUnderflow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeederKind {
    Series,
    Picard,
    Both,
}

/// A sample on the log-uniform checkpoint grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Index into `Trajectory::samples`.
    pub sample: usize,
    /// Grid exponent `k`, the sample sits at `r = 10^(k/64)`.
    pub grid: i64,
}

/// A profile from `r = 0` to wherever the integration stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: SolitonParams,
    pub samples: Vec<SolutionSample>,
    pub checkpoints: Vec<Checkpoint>,
    /// Radius at which seeding handed over to the integrator.
    pub seed_radius: f64,
    pub seeder: SeederKind,
    pub termination: Termination,
    /// Accumulated local error estimate of `h` over all accepted steps.
    pub error_estimate: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn first(&self) -> &SolutionSample {
        &self.samples[0]
    }

    pub fn last(&self) -> &SolutionSample {
        self.samples.last().expect("trajectory has at least the origin sample")
    }

    pub fn r_end(&self) -> f64 {
        self.last().r
    }

    pub fn reached_r_max(&self) -> bool {
        matches!(self.termination, Termination::ReachedRMax)
    }

    pub fn checkpoint_samples(&self) -> impl Iterator<Item = (i64, &SolutionSample)> + '_ {
        self.checkpoints.iter().map(move |c| (c.grid, &self.samples[c.sample]))
    }

    /// Samples with `r > 0`.
    pub fn interior(&self) -> impl Iterator<Item = &SolutionSample> + '_ {
        self.samples.iter().filter(|s| s.r > 0.0)
    }

    /// Index of the last sample with `r <= x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < 0.0 || x > self.r_end() {
            return None;
        }
        let i = self.samples.partition_point(|s| s.r <= x);
        Some(i.saturating_sub(1))
    }
}

/// The five diagnostic functions at one sample, plus `u_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `r h_r / h`
    pub q: f64,
    /// `r h`
    pub u: f64,
    /// `r h_r`
    pub p: f64,
    /// `r (q + 1)`
    pub v: f64,
    /// `u_r / h^2`
    pub w: f64,
    /// `p + h`
    pub ur: f64,
}

fn check_domain(r: f64, h: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(SolitonError::Domain(format!(
            "r must be positive, got {r}; use a seeding routine at the origin"
        )));
    }
    if !(h > 0.0) {
        return Err(SolitonError::Domain(format!("h must be positive, got {h}")));
    }
    Ok(())
}

/// `h_rr` from the regular form
/// `h_rr = h_r^2/(2h) + (n-1)(h-1)/(2r^2) - ((n-1+lambda r)/(2r)) h_r/h`.
pub fn ode_rhs(params: &SolitonParams, r: f64, h: f64, hr: f64) -> Result<f64> {
    check_domain(r, h)?;
    Ok(rhs_unchecked(params, r, h, hr))
}

#[inline]
pub(crate) fn rhs_unchecked(params: &SolitonParams, r: f64, h: f64, hr: f64) -> f64 {
    let nm1 = params.nm1();
    hr * hr / (2.0 * h) + nm1 * (h - 1.0) / (2.0 * r * r)
        - (nm1 + params.lambda * r) / (2.0 * r) * (hr / h)
}

/// Residual of the undivided equation
/// `2 r^2 h h_rr - (n-1) h (h-1) - r h_r (r h_r - lambda r - (n-1))`.
pub fn raw_residual(params: &SolitonParams, r: f64, h: f64, hr: f64, hrr: f64) -> f64 {
    let nm1 = params.nm1();
    2.0 * r * r * h * hrr - nm1 * h * (h - 1.0) - r * hr * (r * hr - params.lambda * r - nm1)
}

/// Sum of the magnitudes of the terms in [`raw_residual`], for relative checks.
pub fn raw_residual_scale(params: &SolitonParams, r: f64, h: f64, hr: f64, hrr: f64) -> f64 {
    let nm1 = params.nm1();
    (2.0 * r * r * h * hrr).abs()
        + (nm1 * h * (h - 1.0)).abs()
        + (r * hr * r * hr).abs()
        + (r * hr * params.lambda * r).abs()
        + (r * hr * nm1).abs()
}

/// Right-hand side in logarithmic variables `s = ln r`, `y = ln h`, `q = r h_r / h`:
/// `y_s = q`, `q_s = q - q^2/2 + (n-1)(h-1)/(2h) - (n-1+lambda r) q/(2h)`.
#[cfg(test)]
pub(crate) fn log_rhs(params: &SolitonParams, s: f64, y: f64, q: f64) -> [f64; 2] {
    let nm1 = params.nm1();
    let r = s.exp();
    let inv_h = (-y).exp();
    let qs = q - 0.5 * q * q + 0.5 * nm1 * (1.0 - inv_h) - 0.5 * (nm1 + params.lambda * r) * q * inv_h;
    [q, qs]
}

/// `log_rhs` in terms of `z = 1 + q`, which keeps `1 + q` to full relative
/// precision when `q` tends to `-1`:
/// `z_s = 2z - z^2/2 + (n-4)/2 + lambda r/(2h) - (n-1+lambda r) z/(2h)`.
#[inline]
pub(crate) fn log_rhs_z(params: &SolitonParams, s: f64, y: f64, z: f64) -> [f64; 2] {
    let nm1 = params.nm1();
    let lr = params.lambda * s.exp();
    let inv_h = (-y).exp();
    let zs = 2.0 * z - 0.5 * z * z + 0.5 * (nm1 - 3.0) + 0.5 * lr * inv_h - 0.5 * (nm1 + lr) * z * inv_h;
    [z - 1.0, zs]
}

pub fn diagnostics_at(_params: &SolitonParams, sample: &SolutionSample) -> Result<Diagnostics> {
    let SolutionSample { r, h, hr } = *sample;
    check_domain(r, h)?;
    let p = r * hr;
    let q = p / h;
    let u = r * h;
    let ur = p + h;
    Ok(Diagnostics { q, u, p, v: r * (q + 1.0), w: ur / (h * h), ur })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32, lambda: f64, mu1: f64) -> SolitonParams {
        SolitonParams::new(n, lambda, mu1).unwrap()
    }

    #[test]
    fn stationary_profile_is_a_rest_point() {
        assert_eq!(ode_rhs(&p(3, 0.0, 0.0), 1.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn linear_expanding_profile_has_zero_curvature() {
        let v = ode_rhs(&p(3, 1.0, 1.0 / 3.0), 2.0, 1.0 + 2.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!(v.abs() < 1e-15, "{v}");
    }

    #[test]
    fn both_forms_agree_on_hand_example() {
        // 2*1*2*hrr = 1*2*1 + 1*1*(1 - 0 - 1)  =>  hrr = 1/2
        let prm = p(2, 0.0, 0.0);
        let hrr = ode_rhs(&prm, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(hrr, 0.5);
        assert_eq!(raw_residual(&prm, 1.0, 2.0, 1.0, hrr), 0.0);
    }

    #[test]
    fn rhs_rejects_origin_and_nonpositive_h() {
        let prm = p(3, 0.0, -1.0);
        assert!(matches!(ode_rhs(&prm, 0.0, 1.0, 0.0), Err(SolitonError::Domain(_))));
        assert!(matches!(ode_rhs(&prm, 1.0, 0.0, 0.0), Err(SolitonError::Domain(_))));
        assert!(matches!(ode_rhs(&prm, 1.0, -2.0, 0.0), Err(SolitonError::Domain(_))));
    }

    #[test]
    fn diagnostics_examples() {
        let prm = p(3, 1.0, 1.0 / 3.0);
        let d = diagnostics_at(&prm, &SolutionSample { r: 1.0, h: 1.0, hr: 0.0 }).unwrap();
        assert_eq!((d.q, d.u, d.p, d.v, d.w), (0.0, 1.0, 0.0, 1.0, 1.0));

        let d = diagnostics_at(&prm, &SolutionSample { r: 3.0, h: 2.0, hr: 1.0 / 3.0 }).unwrap();
        assert!((d.q - 0.5).abs() < 1e-15);
        assert_eq!(d.u, 6.0);
        assert!((d.p - 1.0).abs() < 1e-15);
        assert!((d.v - 4.5).abs() < 1e-14);
        assert!((d.w - 0.75).abs() < 1e-15);

        let d = diagnostics_at(&prm, &SolutionSample { r: 2.0, h: 0.5, hr: -0.125 }).unwrap();
        assert_eq!((d.q, d.u, d.p, d.v, d.w), (-0.5, 1.0, -0.25, 1.0, 1.0));
    }

    #[test]
    fn diagnostics_undefined_at_origin() {
        let prm = p(3, 0.0, -1.0);
        let s = SolutionSample { r: 0.0, h: 1.0, hr: -1.0 };
        assert!(diagnostics_at(&prm, &s).is_err());
    }

    #[test]
    fn shifted_log_rhs_matches_log_rhs() {
        let prm = p(5, 0.7, -0.3);
        for (s, y, q) in [(0.3, -0.2, -0.9), (2.0, 1.5, 0.4), (-1.0, -3.0, -1.0 + 1e-3)] {
            let a = log_rhs(&prm, s, y, q);
            let b = log_rhs_z(&prm, s, y, 1.0 + q);
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12 * (1.0 + a[1].abs()));
        }
    }

    #[test]
    fn log_rhs_matches_chain_rule() {
        let prm = p(4, 0.7, -0.3);
        for &(r, h, hr) in &[(0.3, 0.8, -0.2), (12.0, 0.1, -0.004), (1e4, 3.0, 1e-5)] {
            let hrr = rhs_unchecked(&prm, r, h, hr);
            let q = r * hr / h;
            // q_s = r q_r = r (h_r/h + r h_rr/h - r h_r^2/h^2)
            let expect = r * (hr / h + r * hrr / h - r * hr * hr / (h * h));
            let [ys, qs] = log_rhs(&prm, r.ln(), h.ln(), q);
            assert!((ys - q).abs() < 1e-15);
            assert!((qs - expect).abs() <= 1e-12 * (1.0 + expect.abs()), "{qs} vs {expect}");
        }
    }

    #[test]
    fn checkpoint_grid_indexing() {
        assert_eq!(checkpoint_radius(0), 1.0);
        assert_eq!(checkpoint_radius(64 * 6), 1e6);
        let k = checkpoint_index_above(1.0, false);
        assert_eq!(k, 0);
        assert_eq!(checkpoint_index_above(1.0, true), 1);
        let k = checkpoint_index_above(3e-3, false);
        assert!(checkpoint_radius(k) >= 3e-3 && checkpoint_radius(k - 1) < 3e-3);
    }

    #[test]
    fn n_below_two_is_rejected() {
        assert!(SolitonParams::new(1, 0.0, 0.0).is_err());
    }
}
