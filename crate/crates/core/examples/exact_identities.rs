//! Exact Markov chain quantities checked against their resistance forms:
//! escape probabilities, return and commute times, the excursion visit law,
//! the return-time law and the exact cover time of a small graph.

use resistwalk::exact_chain::{
    excursion_law_from_resistance, excursion_second_moment_formula, excursion_visit_law, expected_cover_time,
    expected_hitting_time, expected_return_time, hit_before_return_prob, return_tail_block_bound, return_time_tail,
};
use resistwalk::graphs::{build_graph, generate, Family, FamilySpec};
use resistwalk::resistance::resistance_matrix;

fn main() -> resistwalk::Result<()> {
    let g = generate(FamilySpec::new(Family::Gasket, 2))?;
    let rm = resistance_matrix(&g)?;
    let m = g.total_mass();
    let (x, y) = (0, 9);
    let r = rm.get(x, y);
    let (mu_x, mu_y) = (g.measure(x), g.measure(y));

    println!("P_x(tau_y < tau_x^+) = {:.12}, 1/(mu_x R) = {:.12}", hit_before_return_prob(&g, x, y)?, 1.0 / (mu_x * r));
    println!("E_x tau_x^+ = {:.10}, m/mu_x = {:.10}", expected_return_time(&g, x)?, m / mu_x);
    let commute = expected_hitting_time(&g, x, y)? + expected_hitting_time(&g, y, x)?;
    println!("commute time = {:.10}, m R = {:.10}", commute, m * r);

    let law = excursion_visit_law(&g, x, y, 6)?;
    let (closed, _) = excursion_law_from_resistance(mu_x, mu_y, r, 6);
    println!("excursion pmf (first-step): {:.6?}", law.law.pmf);
    println!("excursion pmf (resistance): {closed:.6?}");
    let (_, second) = law.eta_moments();
    println!(
        "E(eta - 1/mu_x)^2 = {second:.8} = {:.8} <= 2R/mu_x = {:.8}",
        excursion_second_moment_formula(mu_x, mu_y, r),
        2.0 * r / mu_x
    );

    let tail = return_time_tail(&g, x, 400)?;
    for t in [10, 50, 200] {
        println!(
            "P(tau_x^+ >= {t}) = {:.3e} <= block bound {:.3e}",
            tail.survival(t),
            return_tail_block_bound(m, rm.diameter(), mu_x, t as f64)
        );
    }

    let triangle = build_graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])?;
    println!("triangle: E tau_cov = {}", expected_cover_time(&triangle, 0)?);
    Ok(())
}
