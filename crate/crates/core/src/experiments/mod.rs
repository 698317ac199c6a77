//! Monte Carlo and exact studies over the graph families.
//!
//! Every stochastic routine takes a master seed; trial `k` of experiment
//! cell `c` draws from stream `(c, k)` (see [`crate::rng`]), and results are
//! reduced in trial order, so outputs do not depend on the thread count.

pub mod carpet;
pub mod scaling;
pub mod stats;
pub mod tails;
pub mod uvd;

use crate::error::{Error, Result};
use crate::graphs::{generate, Family, FamilySpec, Point, WeightedGraph};
use crate::resistance::{resistance_matrix, ResistanceMatrix};
use crate::walk_sim::Kernel;

pub use carpet::{carpet_rho_estimate, compare_wired, CarpetReport, WiringComparison};
pub use scaling::{cover_time_scaling, local_time_scaling, local_time_scaling_with, ScalingReport};
pub use tails::{
    gamma_growth, modulus_equicontinuity_gasket, modulus_tail, sup_local_time_tail, tail_curve_thm_a,
    tail_curve_thm_b, thm_b_bound, GammaGrowth, Quantiles, TailCurve, TailKind,
};
pub use uvd::{check_uvd, estimate_exponents, ExponentReport, UvdReport};

/// Graphs up to this size use every vertex as a start.
pub const EXHAUSTIVE_START_LIMIT: usize = 30;
/// Fewest trials accepted by the tail estimators.
pub const MIN_TRIALS: u32 = 100;

/// A generated graph with its resistance matrix, walk kernel and starts.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub family: Family,
    pub level: u32,
    pub graph: WeightedGraph,
    pub rm: ResistanceMatrix,
    pub kernel: Kernel,
    pub starts: Vec<usize>,
}

impl Prepared {
    pub fn new(family: Family, level: u32) -> Result<Self> {
        let graph = generate(FamilySpec::new(family, level))?;
        let rm = resistance_matrix(&graph)?;
        let kernel = Kernel::new(&graph);
        let starts = start_vertices(&graph);
        Ok(Prepared {
            family,
            level,
            graph,
            rm,
            kernel,
            starts,
        })
    }

    pub fn id(&self) -> String {
        format!("{}-{}", self.family.name(), self.level)
    }
}

fn reference_points(family: Family) -> Vec<Point> {
    let h = 3f64.sqrt() / 2.0;
    match family {
        Family::Path => vec![[0.0, 0.0], [0.5, 0.0]],
        Family::Gasket => vec![[0.0, 0.0], [0.5, 0.0], [0.5, h / 3.0]],
        Family::Vicsek => vec![[0.0, 0.0], [0.5, 0.5]],
        Family::Carpet | Family::WiredCarpet => vec![[0.0, 0.0], [0.5, 0.0], [0.5, 0.5]],
    }
}

/// Start vertices standing in for the maximum over starting points: every
/// vertex on small graphs, otherwise the vertices nearest to the family's
/// symmetry representatives (corner, edge midpoint, centre), lowest id on ties.
pub fn start_vertices(g: &WeightedGraph) -> Vec<usize> {
    let n = g.num_vertices();
    if n <= EXHAUSTIVE_START_LIMIT {
        return (0..n).collect();
    }
    let Some(family) = g.meta().family else {
        return vec![0, n / 2, n - 1];
    };
    let mut out = Vec::new();
    for p in reference_points(family) {
        let best = (0..n)
            .filter_map(|x| g.coord(x).map(|c| (x, crate::graphs::euclid(c, p))))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((x, _)) = best {
            if !out.contains(&x) {
                out.push(x);
            }
        }
    }
    if out.is_empty() {
        out.push(0);
    }
    out
}

/// Vertex nearest to `p`, lowest id on ties.
pub fn nearest_vertex(g: &WeightedGraph, p: Point) -> Result<usize> {
    (0..g.num_vertices())
        .filter_map(|x| g.coord(x).map(|c| (x, crate::graphs::euclid(c, p))))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(x, _)| x)
        .ok_or_else(|| Error::Schema("graph has no coordinates".into()))
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Range("lambda grid is empty".into()));
    }
    if grid.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Range("lambda grid must be increasing and nonnegative".into()));
    }
    Ok(())
}

pub(crate) fn check_trials(n: u32) -> Result<()> {
    if n < MIN_TRIALS {
        return Err(Error::Range(format!("need at least {MIN_TRIALS} trials, got {n}")));
    }
    Ok(())
}
