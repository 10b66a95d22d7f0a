//! Power-series seed at the tip: coefficients, convergence radius and the
//! radius where the integrator takes over.
//!
//! cargo run --example series_seed -- 3 1 0.5

use soliton_kit::model::SolitonParams;
use soliton_kit::series::{compute_coefficients, eval_series, series_residual, tail_bound, DEFAULT_ORDER};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let (n, lambda, mu1) = match args[..] {
        [n, l, m] => (n as u32, l, m),
        _ => (3, 1.0, 0.5),
    };
    let params = SolitonParams::new(n, lambda, mu1)?;
    let s = compute_coefficients(&params, DEFAULT_ORDER)?;

    println!("n = {n}, lambda = {lambda}, mu1 = {mu1}");
    println!("c2 = {:e}  (closed form {:e})", s.coeffs[2], mu1 * (n as f64 * mu1 - lambda) / (n as f64 + 3.0));
    for (k, c) in s.coeffs.iter().enumerate().take(8) {
        println!("  c{k:<2} = {c:+.6e}");
    }
    println!("guaranteed radius  {:e}", s.radius_lb);
    println!("empirical radius   {:e}", s.empirical_radius);
    println!("handoff radius     {:e}", s.handoff_radius);

    let r = s.handoff_radius;
    let (h, hr) = eval_series(&s, r)?;
    println!("h({r:e}) = {h:.15}, h_r = {hr:.15}");
    println!("tail bound {:.2e}, ODE residual {:.2e}", tail_bound(&s, r)?, series_residual(&s, r)?);
    Ok(())
}
