//! Evaluation of a trajectory between its samples.
//!
//! `h` is a cubic Hermite spline through `(h, h_r)` with the Fritsch–Carlson
//! limiter applied where the slopes would break monotonicity of a segment;
//! `h_r` is a cubic Hermite spline through `(h_r, h_rr)` with `h_rr` taken
//! from the ODE itself.

use crate::error::{Result, SolitonError};
use crate::model::{rhs_unchecked, SolutionSample, Trajectory};

pub struct ProfileInterpolant<'a> {
    samples: &'a [SolutionSample],
    hrr: Vec<f64>,
}

impl<'a> ProfileInterpolant<'a> {
    pub fn new(traj: &'a Trajectory) -> Self {
        let p = &traj.params;
        let n = p.n as f64;
        let hrr = traj
            .samples
            .iter()
            .map(|s| {
                if s.r > 0.0 {
                    rhs_unchecked(p, s.r, s.h, s.hr)
                } else {
                    // 2 c_2
                    2.0 * p.mu1 * (n * p.mu1 - p.lambda) / (n + 3.0)
                }
            })
            .collect();
        Self { samples: &traj.samples, hrr }
    }

    pub fn r_min(&self) -> f64 {
        self.samples[0].r
    }

    pub fn r_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].r
    }

    /// Index of the segment `[r_i, r_{i+1}]` containing `r`.
    fn segment(&self, r: f64) -> Result<usize> {
        if !(r >= self.r_min() && r <= self.r_max()) {
            return Err(SolitonError::OutOfRange(r));
        }
        let i = self.samples.partition_point(|s| s.r <= r);
        Ok(i.saturating_sub(1).min(self.samples.len().saturating_sub(2)))
    }

    /// Sample radii, the natural breakpoints for quadrature.
    pub fn knots(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.r)
    }

    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let i = self.segment(r)?;
        if self.samples.len() == 1 {
            let s = self.samples[0];
            return Ok((s.h, s.hr));
        }
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        if r == a.r {
            return Ok((a.h, a.hr));
        }
        if r == b.r {
            return Ok((b.h, b.hr));
        }
        let dx = b.r - a.r;
        let t = (r - a.r) / dx;

        let (mut d0, mut d1) = (a.hr, b.hr);
        let secant = (b.h - a.h) / dx;
        if secant != 0.0 {
            let (alpha, beta) = (d0 / secant, d1 / secant);
            let norm2 = alpha * alpha + beta * beta;
            if alpha >= 0.0 && beta >= 0.0 && norm2 > 9.0 {
                let tau = 3.0 / norm2.sqrt();
                d0 *= tau;
                d1 *= tau;
            }
        }
        let h = hermite(t, dx, a.h, d0, b.h, d1);
        let hr = hermite(t, dx, a.hr, self.hrr[i], b.hr, self.hrr[i + 1]);
        Ok((h, hr))
    }
}

#[inline]
fn hermite(t: f64, dx: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * dx * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * dx * d1
}

/// 15-point Gauss–Kronrod nodes on `[-1, 1]` (non-negative half) with the
/// Kronrod and embedded 7-point Gauss weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = hw * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * hw, ((kronrod - gauss) * hw).abs())
}

/// Adaptive Gauss–Kronrod quadrature of a smooth integrand on `[a, b]`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gauss_kronrod(f, a, b);
        if err <= tol.max(1e-300) || depth >= 40 || (b - a) <= 1e-14 * a.abs().max(b.abs()) {
            return val;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let (rough, _) = gauss_kronrod(f, a, b);
    recurse(f, a, b, rel_tol * rough.abs().max(f64::MIN_POSITIVE), 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_of_smooth_functions() {
        let v = adaptive_quad(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-13);
        let v = adaptive_quad(&|x: f64| 1.0 / (1.0 + x * x).sqrt(), 0.0, 10.0, 1e-13);
        assert!((v - 10f64.asinh()).abs() < 1e-12);
    }
}
