//! Power-series seeding of the profile at the singular origin.
//!
//! Writing `h(r) = sum c_k r^k` and matching powers of `r` gives `c_0 = 1`,
//! `c_1 = mu1` and, for `k >= 2`,
//!
//! ```text
//! (k-1)(2k+n-1) c_k + lambda (k-1) c_{k-1}
//!     + sum_{j=1}^{k-1} (3j^2 - (2+k) j - (n-1)) c_j c_{k-j} = 0.
//! ```
//!
//! The coefficients are dominated by the majorant sequence
//! `c'_1 = |mu1|`, `c'_k = |lambda| c'_{k-1} + 5/2 sum c'_j c'_{k-j}`, whose
//! generating function `b(r)` has a closed form. That gives a guaranteed
//! radius of convergence and a computable tail bound for truncation.

use serde::Serialize;

use crate::error::{Result, SolitonError};
use crate::model::SolitonParams;

pub const DEFAULT_ORDER: usize = 30;

/// Truncation tail accepted at the handoff radius.
pub const HANDOFF_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSolution {
    pub params: SolitonParams,
    /// `c_0 ..= c_K`, lowest order first.
    pub coeffs: Vec<f64>,
    /// `c'_0 ..= c'_K` with `c'_0 = 0`.
    pub majorant_coeffs: Vec<f64>,
    /// Guaranteed lower bound on the radius of convergence.
    pub radius_lb: f64,
    /// Radius at which the integrator takes over.
    pub handoff_radius: f64,
    /// Largest radius where the majorant tail beyond order `K` is `<= HANDOFF_TAIL`.
    pub empirical_radius: f64,
}

impl SeriesSolution {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// `min(1/(10(|lambda|+1)), 1/(200(|mu1|+1)))`.
pub fn radius_lower_bound(params: &SolitonParams) -> f64 {
    let a = 1.0 / (10.0 * (params.lambda.abs() + 1.0));
    let b = 1.0 / (200.0 * (params.mu1.abs() + 1.0));
    a.min(b)
}

pub fn compute_coefficients(params: &SolitonParams, order: usize) -> Result<SeriesSolution> {
    if order < 2 {
        return Err(SolitonError::InvalidParams(format!("series order must be >= 2, got {order}")));
    }
    let n = params.n as f64;
    let nm1 = params.nm1();
    let lam = params.lambda;
    let mut c = vec![0.0; order + 1];
    c[0] = 1.0;
    c[1] = params.mu1;
    // mu1 = 0 collapses to h = 1; the loop below would produce exact zeros
    // too, but skip it so the constant solution never depends on arithmetic.
    if params.mu1 != 0.0 {
        for k in 2..=order {
            let kf = k as f64;
            let mut sum = 0.0;
            for j in 1..k {
                let jf = j as f64;
                sum += (3.0 * jf * jf - (2.0 + kf) * jf - nm1) * c[j] * c[k - j];
            }
            c[k] = -(lam * (kf - 1.0) * c[k - 1] + sum) / ((kf - 1.0) * (2.0 * kf + n - 1.0));
        }
    }

    let majorant = majorant_sequence(params.lambda.abs(), params.mu1.abs(), order);
    let radius_lb = radius_lower_bound(params);
    let empirical_radius = empirical_radius(params, &majorant);
    let handoff_radius = (radius_lb / 2.0).min(empirical_radius);

    Ok(SeriesSolution {
        params: *params,
        coeffs: c,
        majorant_coeffs: majorant,
        radius_lb,
        handoff_radius,
        empirical_radius,
    })
}

fn majorant_sequence(abs_lambda: f64, c1: f64, order: usize) -> Vec<f64> {
    let mut m = vec![0.0; order + 1];
    m[1] = c1;
    for k in 2..=order {
        let conv: f64 = (1..k).map(|j| m[j] * m[k - j]).sum();
        m[k] = abs_lambda * m[k - 1] + 2.5 * conv;
    }
    m
}

/// Largest `r` with a real majorant, the smaller root of `(1 - L r)^2 = 10 c r`.
fn majorant_domain_end(abs_lambda: f64, c1: f64) -> f64 {
    let b = 2.0 * abs_lambda + 10.0 * c1;
    let disc = b * b - 4.0 * abs_lambda * abs_lambda;
    if b == 0.0 {
        return f64::INFINITY;
    }
    2.0 / (b + disc.max(0.0).sqrt())
}

fn majorant_closed_form(abs_lambda: f64, c1: f64, r: f64) -> Option<f64> {
    let a = 1.0 - abs_lambda * r;
    let d = 10.0 * c1 * r;
    let disc = a * a - d;
    if disc < 0.0 || a < 0.0 {
        return None;
    }
    // (a - sqrt(a^2 - d)) / 5 without the cancellation
    if d == 0.0 {
        return Some(0.0);
    }
    Some(d / (5.0 * (a + disc.sqrt())))
}

fn majorant_tail(abs_lambda: f64, c1: f64, majorant: &[f64], r: f64) -> f64 {
    let Some(b) = majorant_closed_form(abs_lambda, c1, r) else {
        return f64::INFINITY;
    };
    let partial = horner(majorant, r);
    (b - partial).max(0.0)
}

fn empirical_radius(params: &SolitonParams, majorant: &[f64]) -> f64 {
    let l = params.lambda.abs();
    let c1 = params.mu1.abs();
    if c1 == 0.0 {
        return f64::INFINITY;
    }
    let end = majorant_domain_end(l, c1);
    if majorant_tail(l, c1, majorant, end) <= HANDOFF_TAIL {
        return end;
    }
    let (mut lo, mut hi) = (0.0, end);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if majorant_tail(l, c1, majorant, mid) <= HANDOFF_TAIL {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

fn horner(coeffs: &[f64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

/// Partial sums of the series and of its term-by-term derivative at `r`.
///
/// Accepts any `r` in `[0, radius_lb]`, the interval where convergence is
/// guaranteed; the integrator itself only ever asks for `r <= handoff_radius`.
pub fn eval_series(series: &SeriesSolution, r: f64) -> Result<(f64, f64)> {
    if !(0.0..=series.radius_lb).contains(&r) {
        return Err(SolitonError::Domain(format!(
            "series evaluated at r = {r}, outside [0, {}]",
            series.radius_lb
        )));
    }
    let c = &series.coeffs;
    let h = horner(c, r);
    let k = c.len() - 1;
    let mut hr = 0.0;
    for i in (1..=k).rev() {
        hr = hr * r + i as f64 * c[i];
    }
    Ok((h, hr))
}

/// Closed-form majorant `b(r) = (1 - |lambda| r - sqrt((1 - |lambda| r)^2 - 10 c'_1 r)) / 5`.
pub fn majorant_value(series: &SeriesSolution, r: f64) -> Result<f64> {
    let l = series.params.lambda.abs();
    let c1 = series.majorant_coeffs[1];
    if r < 0.0 {
        return Err(SolitonError::Domain(format!("majorant needs r >= 0, got {r}")));
    }
    majorant_closed_form(l, c1, r).ok_or_else(|| {
        SolitonError::Domain(format!("majorant discriminant is negative at r = {r}"))
    })
}

/// Upper bound on the truncation error `sum_{k>K} |c_k| r^k`.
pub fn tail_bound(series: &SeriesSolution, r: f64) -> Result<f64> {
    let b = majorant_value(series, r)?;
    Ok((b - horner(&series.majorant_coeffs, r)).max(0.0))
}

/// Coefficients `R_0 ..= R_2K` of the polynomial obtained by applying the
/// undivided ODE operator to the truncated series. `R_k` vanishes up to
/// round-off for `k <= K`; the first genuine term is `R_{K+1}`.
pub fn residual_polynomial(series: &SeriesSolution) -> Vec<f64> {
    let c = &series.coeffs;
    let kmax = c.len() - 1;
    let n = series.params.n as f64;
    let nm1 = series.params.nm1();
    let lam = series.params.lambda;
    let coeff = |j: usize| if j <= kmax { c[j] } else { 0.0 };
    let mut out = vec![0.0; 2 * kmax + 1];
    for (k, slot) in out.iter_mut().enumerate().skip(2) {
        let kf = k as f64;
        let mut acc = (kf - 1.0) * (2.0 * kf + n - 1.0) * coeff(k) + lam * (kf - 1.0) * coeff(k - 1);
        for j in 1..k {
            let jf = j as f64;
            acc += (3.0 * jf * jf - (2.0 + kf) * jf - nm1) * coeff(j) * coeff(k - j);
        }
        *slot = acc;
    }
    out
}

/// Residual of the undivided ODE for the truncated series at `r`, summed
/// from [`residual_polynomial`] so that it is not swamped by cancellation.
pub fn series_residual(series: &SeriesSolution, r: f64) -> Result<f64> {
    eval_series(series, r)?;
    Ok(horner(&residual_polynomial(series), r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32, lambda: f64, mu1: f64) -> SolitonParams {
        SolitonParams::new(n, lambda, mu1).unwrap()
    }

    #[test]
    fn linear_expanding_profile_has_no_higher_coefficients() {
        let s = compute_coefficients(&p(3, 1.0, 1.0 / 3.0), 10).unwrap();
        for k in 2..=10 {
            assert!(s.coeffs[k].abs() <= 1e-15, "c_{k} = {}", s.coeffs[k]);
        }
    }

    #[test]
    fn second_coefficient_closed_form() {
        let s = compute_coefficients(&p(3, 0.0, -1.0), 5).unwrap();
        assert_eq!(s.coeffs[2], 0.5);
        let prm = p(5, 1.7, 0.3);
        let s = compute_coefficients(&prm, 5).unwrap();
        let expect = 0.3 * (5.0 * 0.3 - 1.7) / 8.0;
        assert!((s.coeffs[2] - expect).abs() < 1e-16);
    }

    #[test]
    fn radius_examples() {
        assert_eq!(radius_lower_bound(&p(3, 0.0, 0.0)), 1.0 / 200.0);
        assert_eq!(radius_lower_bound(&p(3, 1.0, -1.0)), 1.0 / 400.0);
        let r = radius_lower_bound(&p(3, 0.0, -1e6));
        assert!((r - 1.0 / (200.0 * (1e6 + 1.0))).abs() < 1e-22);
        assert!((r - 4.999995e-9).abs() < 1e-15);
    }

    #[test]
    fn eval_at_origin_returns_initial_data() {
        let s = compute_coefficients(&p(4, 0.5, -0.7), 30).unwrap();
        assert_eq!(eval_series(&s, 0.0).unwrap(), (1.0, -0.7));
    }

    #[test]
    fn eval_rejects_radius_outside_guarantee() {
        let s = compute_coefficients(&p(4, 0.5, -0.7), 30).unwrap();
        assert!(eval_series(&s, 2.0 * s.radius_lb).is_err());
        assert!(eval_series(&s, -1e-9).is_err());
    }

    #[test]
    fn eval_exact_expanding_profile() {
        let s = compute_coefficients(&p(3, 1.0, 1.0 / 3.0), 30).unwrap();
        let (h, hr) = eval_series(&s, 1e-3).unwrap();
        assert!((h - (1.0 + 1e-3 / 3.0)).abs() <= 1e-15);
        assert!((hr - 1.0 / 3.0).abs() <= 1e-15);
    }

    #[test]
    fn low_order_truncation_matches_high_order_reference() {
        let prm = p(3, 0.0, -1.0);
        let hi = compute_coefficients(&prm, 30).unwrap();
        let lo = compute_coefficients(&prm, 3).unwrap();
        let r = 1e-3;
        let (h30, _) = eval_series(&hi, r).unwrap();
        let (h3, _) = eval_series(&lo, r).unwrap();
        assert!((h30 - (1.0 - 1e-3 + 0.5e-6 + hi.coeffs[3] * 1e-9)).abs() < 1e-12);
        // remaining terms start at r^4
        assert!((h30 - h3).abs() < 10.0 * hi.coeffs[4].abs() * 1e-12 + 1e-16);
    }

    #[test]
    fn majorant_examples() {
        let s = compute_coefficients(&p(3, 0.0, 0.0), 10).unwrap();
        assert_eq!(majorant_value(&s, 1e-3).unwrap(), 0.0);

        let s = compute_coefficients(&p(3, 0.0, 1.0), 10).unwrap();
        let b = majorant_value(&s, 0.025).unwrap();
        let expect = (1.0 - 0.75f64.sqrt()) / 5.0;
        assert!((b - expect).abs() < 1e-16, "{b} vs {expect}");
        assert!((b - 0.0267949).abs() < 1e-7);

        let s = compute_coefficients(&p(3, 1.0, 1.0), 10).unwrap();
        let b = majorant_value(&s, s.radius_lb).unwrap();
        assert!(b.is_finite() && b >= 0.0);
    }

    #[test]
    fn majorant_rejects_negative_discriminant() {
        let s = compute_coefficients(&p(3, 0.0, 1.0), 10).unwrap();
        assert!(majorant_value(&s, 0.2).is_err());
    }

    #[test]
    fn majorant_sequence_matches_closed_form_taylor() {
        let s = compute_coefficients(&p(2, 0.5, 2.0), 30).unwrap();
        let r = s.radius_lb;
        let b = majorant_value(&s, r).unwrap();
        let partial = horner(&s.majorant_coeffs, r);
        assert!(partial <= b * (1.0 + 1e-14));
        assert!((b - partial) / b < 1e-10);
    }

    #[test]
    fn handoff_is_at_most_half_the_guaranteed_radius() {
        for &mu in &[-1e6, -10.0, -1.0, 0.0, 0.5, 3.0] {
            let s = compute_coefficients(&p(3, 1.0, mu), 30).unwrap();
            assert!(s.handoff_radius > 0.0);
            assert!(s.handoff_radius <= s.radius_lb / 2.0);
            if mu != 0.0 {
                assert!(tail_bound(&s, s.handoff_radius).unwrap() <= HANDOFF_TAIL);
            }
        }
    }

    #[test]
    fn zero_slope_collapses_to_constant() {
        let s = compute_coefficients(&p(3, 2.5, 0.0), 30).unwrap();
        assert!(s.coeffs[1..].iter().all(|&c| c == 0.0));
        assert_eq!(eval_series(&s, s.handoff_radius).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn order_below_two_is_rejected() {
        assert!(compute_coefficients(&p(3, 0.0, 1.0), 1).is_err());
    }

    #[test]
    fn residual_polynomial_matches_direct_evaluation() {
        // low order and a radius near the guarantee, so truncation dominates round-off
        let prm = p(3, 1.0, -2.0);
        let s = compute_coefficients(&prm, 3).unwrap();
        let r = s.radius_lb;
        let (h, hr) = eval_series(&s, r).unwrap();
        let hrr = 2.0 * s.coeffs[2] + 6.0 * s.coeffs[3] * r;
        let direct = crate::model::raw_residual(&prm, r, h, hr, hrr);
        let poly = series_residual(&s, r).unwrap();
        assert!((direct - poly).abs() <= 1e-4 * poly.abs(), "{direct} vs {poly}");
        let coeffs = residual_polynomial(&s);
        for (k, c) in coeffs.iter().enumerate().take(4) {
            assert!(c.abs() < 1e-14, "R_{k} = {c}");
        }
        assert!(coeffs[4].abs() > 1e-6);
    }

    #[test]
    fn residual_shrinks_with_order() {
        let prm = p(3, 1.0, -2.0);
        let r = radius_lower_bound(&prm) / 4.0;
        let r10 = series_residual(&compute_coefficients(&prm, 10).unwrap(), r).unwrap().abs();
        let r20 = series_residual(&compute_coefficients(&prm, 20).unwrap(), r).unwrap().abs();
        assert!(r20 <= r10 / 2.0 || r20 < 1e-18, "{r10} -> {r20}");
    }
}
