//! Effective resistance, the resistance metric and Dirichlet energies.
//!
//! Two-point resistances come from a unit current injected at `x` and
//! extracted at `y`: `R(x, y) = v(x) - v(y)` where `L v = e_x - e_y`. The
//! all-pairs matrix is read off the inverse grounded Laplacian `G` as
//! `G(x,x) + G(y,y) - 2 G(x,y)`. Set resistances wire each set to a single
//! vertex first.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{wire_vertices, Edge, GraphMeta, WeightedGraph};
use crate::linalg::GroundedLaplacian;

/// Default vertex budget for all-pairs matrices.
pub const ALL_PAIRS_BUDGET: usize = 3_000;

/// Reusable resistance oracle for one graph. Each query owns its working
/// vectors, so a shared solver can be queried from several threads.
pub struct ResistanceSolver<'g> {
    laplacian: GroundedLaplacian<'g>,
}

impl<'g> ResistanceSolver<'g> {
    pub fn new(g: &'g WeightedGraph) -> Result<Self> {
        Ok(ResistanceSolver {
            laplacian: GroundedLaplacian::new(g)?,
        })
    }

    pub fn with_dense_limit(g: &'g WeightedGraph, dense_limit: usize) -> Result<Self> {
        Ok(ResistanceSolver {
            laplacian: GroundedLaplacian::with_dense_limit(g, dense_limit)?,
        })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.laplacian.graph()
    }

    /// Potential of the unit current flow from `x` to `y`, grounded at the
    /// last vertex.
    pub fn unit_current_potential(&self, x: usize, y: usize) -> Result<Vec<f64>> {
        let g = self.graph();
        g.check_vertex(x)?;
        g.check_vertex(y)?;
        let mut current = vec![0.0; g.num_vertices()];
        current[x] += 1.0;
        current[y] -= 1.0;
        self.laplacian.potential(&current)
    }

    pub fn resistance(&self, x: usize, y: usize) -> Result<f64> {
        if x == y {
            self.graph().check_vertex(x)?;
            return Ok(0.0);
        }
        let v = self.unit_current_potential(x, y)?;
        let r = v[x] - v[y];
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::SolverFailure(format!(
                "nonpositive resistance {r} between {x} and {y}"
            )));
        }
        Ok(r)
    }
}

pub fn effective_resistance(g: &WeightedGraph, x: usize, y: usize) -> Result<f64> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if x == y {
        return Ok(0.0);
    }
    ResistanceSolver::new(g)?.resistance(x, y)
}

/// Graph with `a` and `b` each merged to a single vertex, plus those ids.
fn wire_pair(g: &WeightedGraph, a: &[usize], b: &[usize]) -> Result<(WeightedGraph, Vec<usize>, usize, usize)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut in_a = vec![false; g.num_vertices()];
    for &x in a {
        g.check_vertex(x)?;
        in_a[x] = true;
    }
    for &y in b {
        g.check_vertex(y)?;
        if in_a[y] {
            return Err(Error::OverlappingSets(y));
        }
    }
    let qa = wire_vertices(g, a)?;
    let b_mapped: Vec<usize> = b.iter().map(|&y| qa.map[y]).collect();
    let qb = wire_vertices(&qa.graph, &b_mapped)?;
    let map: Vec<usize> = qa.map.iter().map(|&z| qb.map[z]).collect();
    let (na, nb) = (qb.map[qa.merged], qb.merged);
    Ok((qb.graph, map, na, nb))
}

/// `R_G(A, B)`: the reciprocal of the least Dirichlet energy over potentials
/// equal to 0 on `a` and 1 on `b`.
pub fn set_resistance(g: &WeightedGraph, a: &[usize], b: &[usize]) -> Result<f64> {
    let (wired, _, na, nb) = wire_pair(g, a, b)?;
    effective_resistance(&wired, na, nb)
}

/// The energy-minimising potential with `f = 0` on `a` and `f = 1` on `b`.
pub fn harmonic_potential(g: &WeightedGraph, a: &[usize], b: &[usize]) -> Result<Vec<f64>> {
    let (wired, map, na, nb) = wire_pair(g, a, b)?;
    let v = ResistanceSolver::new(&wired)?.unit_current_potential(na, nb)?;
    let (va, vb) = (v[na], v[nb]);
    Ok(map.iter().map(|&z| (v[z] - va) / (vb - va)).collect())
}

/// `E(f, f) = 1/2 * sum over ordered adjacent pairs of (f(x) - f(y))^2 mu_xy`.
pub fn dirichlet_energy(g: &WeightedGraph, f: &[f64]) -> Result<f64> {
    if f.len() != g.num_vertices() {
        return Err(Error::MissingValue {
            expected: g.num_vertices(),
            got: f.len(),
        });
    }
    // each undirected edge appears twice among ordered pairs
    Ok(g
        .edges()
        .iter()
        .map(|&Edge { u, v, weight }| (f[u] - f[v]).powi(2) * weight)
        .sum())
}

/// All-pairs effective resistance with its scales `r(G)` and `r_0(G)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResistanceMatrix {
    n: usize,
    values: Vec<f64>,
    r_diam: f64,
    r_min: f64,
    #[serde(skip)]
    graph_meta: GraphMeta,
}

pub fn resistance_matrix(g: &WeightedGraph) -> Result<ResistanceMatrix> {
    resistance_matrix_with_budget(g, ALL_PAIRS_BUDGET)
}

pub fn resistance_matrix_with_budget(g: &WeightedGraph, budget: usize) -> Result<ResistanceMatrix> {
    let n = g.num_vertices();
    if n > budget {
        return Err(Error::BudgetExceeded {
            what: "all-pairs resistance",
            size: n,
            budget,
        });
    }
    let green = GroundedLaplacian::new(g)?.green_matrix()?;
    let mut values = vec![0.0; n * n];
    let mut r_diam = 0.0f64;
    let mut r_min = f64::INFINITY;
    for x in 0..n {
        for y in (x + 1)..n {
            let r = green[(x, x)] + green[(y, y)] - 2.0 * green[(x, y)];
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::SolverFailure(format!(
                    "nonpositive resistance {r} between {x} and {y}"
                )));
            }
            values[x * n + y] = r;
            values[y * n + x] = r;
            r_diam = r_diam.max(r);
            r_min = r_min.min(r);
        }
    }
    Ok(ResistanceMatrix {
        n,
        values,
        r_diam,
        r_min,
        graph_meta: g.meta().clone(),
    })
}

impl ResistanceMatrix {
    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[x * self.n..(x + 1) * self.n]
    }

    /// `r(G)`, the resistance diameter.
    pub fn diameter(&self) -> f64 {
        self.r_diam
    }

    /// `r_0(G)`, the least resistance between distinct vertices.
    pub fn min_distance(&self) -> f64 {
        self.r_min
    }

    /// `R(x, y) / r(G)`, in `[0, 1]`.
    pub fn rescaled(&self, x: usize, y: usize) -> f64 {
        self.get(x, y) / self.r_diam
    }

    pub fn source_meta(&self) -> &GraphMeta {
        &self.graph_meta
    }

    /// Checks symmetry, zero diagonal, positivity off the diagonal, the
    /// triangle inequality on all triples, and `mu_x R(x, y) >= 1`.
    pub fn verify_metric(&self, g: &WeightedGraph, tol: f64) -> Result<()> {
        let n = self.n;
        for x in 0..n {
            if self.get(x, x) != 0.0 {
                return Err(Error::InvariantViolation(format!("R({x},{x}) != 0")));
            }
            for y in 0..n {
                let r = self.get(x, y);
                if (r - self.get(y, x)).abs() > tol {
                    return Err(Error::InvariantViolation(format!("R({x},{y}) not symmetric")));
                }
                if x != y && g.measure(x) * r < 1.0 - tol {
                    return Err(Error::InvariantViolation(format!(
                        "mu_{x} R({x},{y}) = {} < 1",
                        g.measure(x) * r
                    )));
                }
            }
        }
        for x in 0..n {
            let rx = self.row(x);
            for z in 0..n {
                let rxz = rx[z];
                let rz = self.row(z);
                for y in 0..n {
                    if rx[y] > rxz + rz[y] + tol {
                        return Err(Error::InvariantViolation(format!(
                            "triangle inequality fails on ({x},{z},{y})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `row,col,R` lines for `row < col`, preceded by a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,R\n");
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                out.push_str(&format!("{x},{y},{}\n", self.get(x, y)));
            }
        }
        out
    }
}
