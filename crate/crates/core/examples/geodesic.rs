//! Metric picture: geodesic distance from the tip, sectional curvatures,
//! and whether the distance keeps growing.

use soliton_kit::geometry::{completeness_diagnostic, curvature_profile, geodesic_distance, inverse_consistency};
use soliton_kit::integrator::{solve, IntegratorConfig};
use soliton_kit::model::{SeederKind, SolitonParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let exact = solve(&SolitonParams::new(3, 1.0, 1.0 / 3.0)?, SeederKind::Series, &IntegratorConfig::with_r_max(100.0))?;
    for a in [0.5, 2.0, 10.0] {
        let closed = 3f64.sqrt() * (a / 3f64.sqrt()).asinh();
        println!("exact expander t({a}) = {:.12} (closed form {closed:.12})", geodesic_distance(&exact, a)?);
    }

    let steady = solve(&SolitonParams::new(3, 0.0, -1.0)?, SeederKind::Series, &IntegratorConfig::with_r_max(1e6))?;
    let grid = [0.0, 0.1, 1.0, 3.0, 10.0, 100.0, 1000.0];
    let prof = curvature_profile(&steady, &grid)?;
    println!("\nsteady n=3 mu1=-1");
    println!("{:>8} {:>14} {:>12} {:>12}", "a", "t", "K_radial", "K_orbital");
    for (i, a) in grid.iter().enumerate() {
        println!(
            "{:>8} {:>14.6e} {:>12.4e} {:>12.4e}",
            a, prof.t_of_a[i], prof.kappa_radial[i], prof.kappa_orbital[i]
        );
    }
    let c = completeness_diagnostic(&steady)?;
    println!("t(a_max) = {:.4e}, growth exponent {:.4}, diverging {}", c.t_at_rmax, c.growth_exponent, c.diverging);
    println!("inverse consistency on [0.1, 100]: {:.2e}", inverse_consistency(&steady, 0.1, 100.0)?);
    Ok(())
}
