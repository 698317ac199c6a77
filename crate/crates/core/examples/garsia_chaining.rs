//! The discrete chaining inequality applied to a rescaled local-time field on
//! the gasket: for each pair, the observed difference, the chaining bound and
//! the integral bound.

use resistwalk::garsia::{fitted_power_profile, gasket_resistance_volume_exponent, GarsiaSetup, LowerLimit, MetricContext};
use resistwalk::graphs::{generate, Family, FamilySpec};
use resistwalk::resistance::resistance_matrix;
use resistwalk::rng::RngStream;
use resistwalk::walk_sim::{horizon_steps, run_walk};

fn main() -> resistwalk::Result<()> {
    let g = generate(FamilySpec::new(Family::Gasket, 3))?;
    let rm = resistance_matrix(&g)?;
    let ctx = MetricContext::from_resistance(&g, &rm, true)?;
    let profile = fitted_power_profile(&ctx, gasket_resistance_volume_exponent(), 1.0)?;
    let setup = GarsiaSetup::new(&ctx, &profile)?;

    let r = rm.diameter();
    let steps = horizon_steps(&g, r, 1.0)?;
    let field = run_walk(&g, 0, steps, false, &mut RngStream::new(5, 0))?;
    let f: Vec<f64> = field.local_times().iter().map(|l| l / r).collect();
    let gamma = setup.gamma(&f)?;
    println!("Gamma(r^-1 L) = {gamma:.4e}, m^2 = {:.4e}", g.total_mass().powi(2));

    let n = g.num_vertices();
    let mut worst = (0.0f64, 0, 0);
    for x in 0..n {
        for y in x + 1..n {
            let ratio = (f[x] - f[y]).abs() / setup.bound(gamma, x, y)?;
            if ratio > worst.0 {
                worst = (ratio, x, y);
            }
        }
    }
    println!("largest |f(x) - f(y)| / chaining bound: {:.4} at {:?}", worst.0, (worst.1, worst.2));
    let hot = (0..n).max_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
    let cold = (0..n).min_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
    for (x, y) in [(worst.1, worst.2), (hot, cold)] {
        println!(
            "pair ({x}, {y}): |diff| = {:.4}, chaining {:.4}, integral from d0 {:.4}, from 0 {:.4}",
            (f[x] - f[y]).abs(),
            setup.bound(gamma, x, y)?,
            setup.integral_bound(gamma, x, y, LowerLimit::D0)?,
            setup.integral_bound(gamma, x, y, LowerLimit::Zero)?
        );
    }
    Ok(())
}
