//! Tail curves of local-time fluctuation statistics on small gaskets, and the
//! truncated statistic against its closed-form bound.

use resistwalk::experiments::{modulus_equicontinuity_gasket, tail_curve_thm_a, tail_curve_thm_b, thm_b_bound};
use resistwalk::graphs::Family;

fn main() -> resistwalk::Result<()> {
    let grid: Vec<f64> = (0..=8).map(|k| 0.5 * f64::from(k)).collect();
    for c in tail_curve_thm_a(Family::Gasket, &[1, 2], 1.0, &grid, 400, 1)? {
        let slope = c.log_fit.map_or(f64::NAN, |f| f.slope);
        println!("level {}: P(max |dL| / r >= lambda sqrt R~) = {:.3?}, log slope {slope:.2}", c.level, c.prob_est);
    }

    let lambdas = [2.0, 3.0, 4.0];
    for c in tail_curve_thm_b(Family::Gasket, &[2], 1.0, &lambdas, 400, 1)? {
        for (k, l) in lambdas.iter().enumerate() {
            println!(
                "L = 1, lambda = {l}: {:.4} +- {:.4} vs bound {:.4}",
                c.prob_est[k],
                c.ci_halfwidth[k],
                thm_b_bound(*l, 1.0)
            );
        }
    }

    for c in modulus_equicontinuity_gasket(&[1, 2, 3], 1.0, &grid, 400, 1)? {
        println!("gasket level {}: quantiles {:?}", c.level, c.quantiles.unwrap());
    }
    Ok(())
}
