//! Rescaled local times and cover times across gasket levels, summarized by
//! means and Kolmogorov-Smirnov distances between successive levels.

use resistwalk::experiments::{cover_time_scaling, local_time_scaling};

fn main() -> resistwalk::Result<()> {
    let lt = local_time_scaling(&[1, 2, 3, 4], &[1.0], 400, 3)?;
    for f in &lt.functionals {
        let means: Vec<f64> = f.per_level.iter().map(|l| l.mean).collect();
        println!("{:>16}: means {means:.3?}, KS {:.3?}", f.name, f.ks);
    }
    let cover = cover_time_scaling(&[1, 2, 3, 4], 400, 3)?;
    let f = &cover.functionals[0];
    let means: Vec<f64> = f.per_level.iter().map(|l| l.mean).collect();
    println!("5^-i tau_cov: means {means:.3?}, KS {:.3?}", f.ks);
    Ok(())
}
