//! Fixed-point iteration on `[0, eps]`: measured contraction against the
//! guaranteed factor, and agreement with the power series.

use soliton_kit::model::SolitonParams;
use soliton_kit::picard::{
    closed_set_violations, contraction_epsilon, empirical_contraction_ratio, picard_solve, PicardConfig,
    CONTRACTION_BOUND,
};
use soliton_kit::series::{compute_coefficients, eval_series, DEFAULT_ORDER};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (n, lambda, mu1) in [(2, 0.0, -1.0), (3, 1.0, 0.5), (4, 1.0, -1.0)] {
        let p = SolitonParams::new(n, lambda, mu1)?;
        let k = contraction_epsilon(&p);
        let (pair, report) = picard_solve(&p, k.eps2, &PicardConfig::default())?;
        let series = compute_coefficients(&p, DEFAULT_ORDER)?;
        let mut dev = 0.0f64;
        for i in 0..=pair.intervals() {
            let (h, hr) = eval_series(&series, pair.node(i))?;
            dev = dev.max((h - pair.h_vals[i]).abs()).max((hr - pair.w_vals[i]).abs());
        }
        println!("n={n} lambda={lambda} mu1={mu1}");
        println!("  eps2 = {:.4e} (C1 = {:.3}, C2 = {:.3})", k.eps2, k.c1, k.c2);
        println!(
            "  {} iterations, max ratio {:.4} (bound {:.4}), final step {:.1e}",
            report.iterations,
            empirical_contraction_ratio(&report)?,
            CONTRACTION_BOUND,
            report.final_residual
        );
        println!("  closed-set violations: {:?}", closed_set_violations(&p, &pair));
        println!("  max |fixed point - series| = {dev:.2e}");
    }

    // past eps2 nothing is guaranteed, but the iteration may still converge
    let p = SolitonParams::new(3, 0.0, -1.0)?;
    let eps = 50.0 * contraction_epsilon(&p).eps2;
    match picard_solve(&p, eps, &PicardConfig::default()) {
        Ok((_, r)) => println!("exploratory eps = {eps:.3e}: converged in {} iterations", r.iterations),
        Err(e) => println!("exploratory eps = {eps:.3e}: {e}"),
    }
    Ok(())
}
