//! Side-to-side resistance growth on the Sierpinski carpet and the effect of
//! wiring its outer boundary.

use resistwalk::experiments::{carpet_rho_estimate, compare_wired};

fn main() -> resistwalk::Result<()> {
    let report = carpet_rho_estimate(&[0, 1, 2])?;
    println!("side resistances {:.6?}", report.resistances);
    println!("ratios {:.6?}, rho ~ {:.4}, spread {:.4}", report.ratios, report.rho_hat, report.ratio_spread);
    let w = compare_wired(1)?;
    println!(
        "level 1: {} pairs, max(R_wired - R_unwired) = {:.3e}, monotone = {}",
        w.pairs, w.max_excess, w.holds
    );
    Ok(())
}
