//! Dormand–Prince 5(4) step for a two-component system.

pub(crate) type State = [f64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)], dt: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += dt * c * k[0];
        out[1] += dt * c * k[1];
    }
    out
}

pub(crate) struct StepResult {
    pub y: State,
    /// Derivative at the new point (first stage of the next step).
    pub dy: State,
    pub err: State,
}

/// One step from `(t, y)` with derivative `dy0 = f(t, y)` already known.
pub(crate) fn dopri5_step<F>(f: &F, t: f64, y: &State, dy0: &State, dt: f64) -> StepResult
where
    F: Fn(f64, &State) -> State,
{
    let k1 = *dy0;
    let k2 = f(t + C2 * dt, &axpy(y, &[(A21, &k1)], dt));
    let k3 = f(t + C3 * dt, &axpy(y, &[(A31, &k1), (A32, &k2)], dt));
    let k4 = f(t + C4 * dt, &axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], dt));
    let k5 = f(t + C5 * dt, &axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], dt));
    let k6 = f(
        t + dt,
        &axpy(y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], dt),
    );
    let y_new = axpy(y, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], dt);
    let k7 = f(t + dt, &y_new);
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = dt * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    StepResult { y: y_new, dy: k7, err }
}

/// RMS of the componentwise ratios `err / scale`.
pub(crate) fn error_norm(err: &State, scale: &State) -> f64 {
    let a = err[0] / scale[0];
    let b = err[1] / scale[1];
    ((a * a + b * b) / 2.0).sqrt()
}
