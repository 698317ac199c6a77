//! Builds each graph family at a few levels and prints its size, mass and
//! degree profile, then wires the carpet boundary into a single vertex.

use resistwalk::graphs::{build_graph, generate, wire_vertices, Family, FamilySpec};

fn main() -> resistwalk::Result<()> {
    let triangle = build_graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])?;
    println!("triangle: {} vertices, m = {}", triangle.num_vertices(), triangle.total_mass());

    for (family, levels) in [
        (Family::Path, vec![4, 16]),
        (Family::Vicsek, vec![1, 2, 3]),
        (Family::Gasket, vec![1, 2, 3, 4]),
        (Family::Carpet, vec![1, 2]),
    ] {
        for level in levels {
            let g = generate(FamilySpec::new(family, level))?;
            println!(
                "{family:>7} level {level}: |V| = {:5}, |E| = {:5}, m = {:7}, degrees {:?}",
                g.num_vertices(),
                g.num_edges(),
                g.total_mass(),
                g.degree_profile()
            );
        }
    }

    let carpet = generate(FamilySpec::new(Family::Carpet, 1))?;
    let wired = wire_vertices(&carpet, &carpet.meta().boundary)?;
    println!(
        "carpet level 1 wired: {} boundary vertices merged into vertex {} of {}",
        carpet.meta().boundary.len(),
        wired.merged,
        wired.graph.num_vertices()
    );
    Ok(())
}
