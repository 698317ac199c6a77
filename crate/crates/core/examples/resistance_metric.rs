//! Effective resistance on the gasket: the all-pairs matrix, its scales, the
//! corner-to-corner ratio between levels, and a set-to-set resistance.

use resistwalk::graphs::{generate, Family, FamilySpec};
use resistwalk::resistance::{effective_resistance, resistance_matrix, set_resistance, ResistanceSolver};

fn main() -> resistwalk::Result<()> {
    let mut previous = None;
    for level in 0..=4 {
        let g = generate(FamilySpec::new(Family::Gasket, level))?;
        let c = &g.meta().corners;
        let r = effective_resistance(&g, c[0], c[1])?;
        match previous {
            Some(p) => println!("level {level}: R(corner, corner) = {r:.10}, ratio {:.12}", r / p),
            None => println!("level {level}: R(corner, corner) = {r:.10}"),
        }
        previous = Some(r);
    }

    let g = generate(FamilySpec::new(Family::Gasket, 3))?;
    let rm = resistance_matrix(&g)?;
    rm.verify_metric(&g, 1e-10)?;
    println!(
        "gasket(3): r(G) = {:.6}, r0(G) = {:.6}, m(G) r(G) = {:.3}",
        rm.diameter(),
        rm.min_distance(),
        g.total_mass() * rm.diameter()
    );

    // the iterative route agrees with the dense one
    let cg = ResistanceSolver::with_dense_limit(&g, 0)?;
    println!("R(0, 20): dense {:.12}, conjugate gradient {:.12}", rm.get(0, 20), cg.resistance(0, 20)?);

    let c = &g.meta().corners;
    let bottom: Vec<usize> = (0..g.num_vertices())
        .filter(|&x| g.coord(x).is_some_and(|p| p[1] == 0.0))
        .collect();
    println!("R(top corner, bottom side) = {:.6}", set_resistance(&g, &[c[2]], &bottom)?);
    Ok(())
}
