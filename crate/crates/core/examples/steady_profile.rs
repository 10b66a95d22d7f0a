//! Steady solitons with `mu1 < 0` out to `r = 1e6`: decay of `h`, the limits
//! of the rescaled diagnostics, and the consistency of `b1`.

use soliton_kit::asymptotics::{cross_consistency_b1, diagnostic_ode_residuals, verify};
use soliton_kit::integrator::{solve, IntegratorConfig};
use soliton_kit::model::{SeederKind, SolitonParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 2..=6 {
        let p = SolitonParams::new(n, 0.0, -1.0)?;
        let t0 = std::time::Instant::now();
        let traj = solve(&p, SeederKind::Series, &IntegratorConfig::with_r_max(1e6))?;
        let elapsed = t0.elapsed();
        let report = verify(&traj)?;
        let lim = |k: &str| report.limits[k].value;
        let res = diagnostic_ode_residuals(&traj);
        println!(
            "n={n}: {} steps in {elapsed:.2?}, h(1e6) = {:.3e}",
            traj.accepted_steps,
            traj.last().h
        );
        println!(
            "  q_inf {:+.6}  w_inf {:+.6}  v_inf {:+.6}  b1 {:.6}  (target w = {:+.6})",
            lim("q_inf"),
            lim("w_inf"),
            lim("v_inf"),
            lim("b1"),
            (n as f64 - 4.0) / (n as f64 - 1.0)
        );
        match cross_consistency_b1(&traj) {
            Ok(b) => println!("  b1 from u {:.6}, from v {:?}, agree {}", b.b1_from_u, b.b1_from_v, b.agree),
            Err(e) => println!("  b1 cross-check: {e}"),
        }
        println!("  residuals: q {:.1e}, u {:.1e}", res.q_max, res.u_max);
        for c in report.failures() {
            println!("  FAIL {}: {:e}", c.name, c.measured);
        }
    }
    Ok(())
}
