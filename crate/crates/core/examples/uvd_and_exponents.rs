//! Uniform volume growth in the resistance metric and the growth exponents
//! fitted across levels.

use resistwalk::experiments::uvd::default_volume_exponent;
use resistwalk::experiments::{check_uvd, estimate_exponents};
use resistwalk::graphs::Family;

fn main() -> resistwalk::Result<()> {
    for (family, levels) in [
        (Family::Path, vec![4, 8, 16, 32]),
        (Family::Vicsek, vec![1, 2, 3]),
        (Family::Gasket, vec![1, 2, 3, 4]),
    ] {
        let alpha = default_volume_exponent(family);
        let u = check_uvd(family, &levels, alpha)?;
        println!(
            "{family}: v(r) = r^{alpha:.4}, c1 = {:.4}, c2 = {:.4}, c3 = {:.4}, spreads ({:.3}, {:.3}), pass = {}",
            u.c1, u.c2, u.c3, u.c1_spread, u.c2_spread, u.pass
        );
        let e = estimate_exponents(family, &levels)?;
        println!("{family}: alpha ~ {:.4}, beta ~ {:.4}", e.alpha_hat, e.beta_hat);
    }
    println!("gasket targets: alpha = {:.4}, beta - alpha = {:.4}", 3f64.log2(), (5.0f64 / 3.0).log2());
    Ok(())
}
