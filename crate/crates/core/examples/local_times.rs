//! One walk on the gasket with full local-time accounting: the occupation
//! identity, inverse local times, a cover-time sample and the modulus
//! statistic up to the natural time scale.

use resistwalk::graphs::{generate, Family, FamilySpec};
use resistwalk::resistance::resistance_matrix;
use resistwalk::rng::RngStream;
use resistwalk::walk_sim::{
    check_occupation_identity, cover_time, default_cover_cap, horizon_steps, inverse_local_time, modulus_statistic,
    occupation_integral, run_walk, Kernel,
};

fn main() -> resistwalk::Result<()> {
    let g = generate(FamilySpec::new(Family::Gasket, 3))?;
    let rm = resistance_matrix(&g)?;
    let steps = horizon_steps(&g, rm.diameter(), 1.0)?;
    let mut rng = RngStream::new(2024, 0);
    let field = run_walk(&g, 0, steps, true, &mut rng)?;
    check_occupation_identity(&field)?;
    let f: Vec<f64> = (0..g.num_vertices()).map(|x| g.coord(x).map_or(0.0, |p| p[0])).collect();
    let (lhs, rhs) = occupation_integral(&field, &f)?;
    println!("{steps} steps; sum f L mu = {lhs:.6}, sum f(X_j) = {rhs:.6}");
    let hottest = (0..g.num_vertices()).max_by(|&a, &b| field.local_time(a).total_cmp(&field.local_time(b))).unwrap();
    println!("largest local time {:.3} at vertex {hottest}; r^-1 max L = {:.3}", field.local_time(hottest), field.local_time(hottest) / rm.diameter());
    let traj = field.trajectory().unwrap();
    let visits: Vec<u64> = (0..3).filter_map(|i| inverse_local_time(traj, 0, i).ok()).collect();
    println!("visits to vertex 0 at times {visits:?}");

    let kernel = Kernel::new(&g);
    let sample = cover_time(&kernel, 0, default_cover_cap(&g, rm.diameter()), &mut RngStream::new(2024, 1))?;
    println!("cover time {}, first all-positive local time {}", sample.tau_cov, sample.tau_cov_tilde);

    let s = modulus_statistic(&g, &rm, 0, 1.0, &mut RngStream::new(2024, 2))?;
    println!("max over t <= m r and pairs of r^-1 |L_t(x) - L_t(y)| / sqrt(R~ (1 + ln 1/R~)) = {s:.4}");
    Ok(())
}
