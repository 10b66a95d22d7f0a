//! The four expanding cases at `n = 3, lambda = 1`, split by the sign of
//! `mu1` and its position relative to `lambda / n`.

use num_rational::Ratio;
use soliton_kit::asymptotics::{classify_regime, verify};
use soliton_kit::integrator::{solve, IntegratorConfig};
use soliton_kit::model::{SeederKind, SolitonParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = Ratio::from_integer(1);
    for mu1 in [Ratio::new(-1, 2), Ratio::new(1, 5), Ratio::new(1, 3), Ratio::new(1, 2)] {
        // rationals make mu1 = lambda/n an exact comparison
        let p = SolitonParams::from_rationals(3, one, mu1)?;
        let traj = solve(&p, SeederKind::Series, &IntegratorConfig::with_r_max(1e5))?;
        let report = verify(&traj)?;
        println!(
            "mu1 = {mu1:>4}: {:?}, {} at r = {:.3e}, h = {:.6e}",
            classify_regime(&p)?,
            traj.termination.label(),
            traj.r_end(),
            traj.last().h
        );
        for (k, l) in &report.limits {
            println!("    {k} = {:.8}", l.value);
        }
        for c in &report.checks {
            println!("    [{}] {} ({:.3e})", if c.pass { "ok" } else { "FAIL" }, c.name, c.measured);
        }
    }
    Ok(())
}
