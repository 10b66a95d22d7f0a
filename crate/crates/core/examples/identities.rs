//! Two exact identities a computed profile must satisfy: the scaling
//! symmetry of steady solitons and the integral formula for `h_r`.

use soliton_kit::integrator::{residual_integral_identity, solve, IntegratorConfig};
use soliton_kit::model::{SeederKind, SolitonParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // lambda = 0: h(mu r; mu1) = h(r; mu mu1)
    let radii: Vec<f64> = (0..9).map(|i| 10f64.powf(-2.0 + 0.5 * i as f64)).collect();
    let r_last = *radii.last().unwrap();
    for mu in [0.5, 2.0, 10.0] {
        let mut a_cfg = IntegratorConfig::with_r_max(mu * r_last);
        a_cfg.extra_stops = radii.iter().map(|r| mu * r).collect();
        let mut b_cfg = IntegratorConfig::with_r_max(r_last);
        b_cfg.extra_stops = radii.clone();
        let a = solve(&SolitonParams::new(3, 0.0, -1.0)?, SeederKind::Series, &a_cfg)?;
        let b = solve(&SolitonParams::new(3, 0.0, -mu)?, SeederKind::Series, &b_cfg)?;
        let worst = radii
            .iter()
            .map(|r| {
                let ha = a.samples.iter().find(|s| s.r == mu * r).unwrap().h;
                let hb = b.samples.iter().find(|s| s.r == *r).unwrap().h;
                (ha - hb).abs() / ha.max(1.0)
            })
            .fold(0.0, f64::max);
        println!("scaling mu = {mu:>4}: max deviation {worst:.2e}");
    }

    for (n, lambda, mu1) in [(3, 0.0, -1.0), (3, 1.0, 0.2), (5, 1.0, -0.5)] {
        let t = solve(&SolitonParams::new(n, lambda, mu1)?, SeederKind::Series, &IntegratorConfig::with_r_max(1e5))?;
        println!(
            "integral identity n={n} lambda={lambda} mu1={mu1}: residual {:.2e} on [10, 1e4]",
            residual_integral_identity(&t, 10.0, 1e4)?
        );
    }
    Ok(())
}
