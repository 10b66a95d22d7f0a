//! Shrinking solitons exist at least up to `0.99 (n-1)/|lambda|`; what
//! happens past that is reported, not checked.

use soliton_kit::integrator::{build_seed, integrate_negative_lambda, IntegratorConfig};
use soliton_kit::model::{SeederKind, SolitonParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [2, 3, 4] {
        for mu1 in [-0.5, 0.5] {
            let p = SolitonParams::new(n, -1.0, mu1)?;
            let seed = build_seed(&p, SeederKind::Series)?;
            let run = integrate_negative_lambda(&p, seed.as_ref(), &IntegratorConfig::with_r_max(20.0))?;
            let t = &run.trajectory;
            println!(
                "n={n} mu1={mu1:+}: target {:.2} {}, then {} at r = {:.4} (h = {:.3e}){}",
                run.r_target,
                if run.reached_target { "reached" } else { "MISSED" },
                t.termination.label(),
                t.r_end(),
                t.last().h,
                if run.continued_past_critical { ", past the critical radius" } else { "" }
            );
        }
    }
    Ok(())
}
