//! Weighted graphs: construction, validation, boundary wiring and the
//! self-similar families (path, Vicsek tree, Sierpinski gasket, Sierpinski
//! carpet with and without a wired boundary).
//!
//! Vertices are dense integers `0..n`. A [`WeightedGraph`] is immutable once
//! built; every constructor checks symmetry, positivity, absence of loops and
//! connectivity, and precomputes the vertex measure `mu_x` and total mass.

mod families;
mod wire;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use families::{euclid, generate, generate_with_limits, Family, FamilySpec, LevelLimits};
pub use wire::{wire_vertices, Quotient};

/// Planar position of a vertex.
pub type Point = [f64; 2];

/// Undirected edge with a positive conductance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, weight: f64) -> Self {
        Edge { u, v, weight }
    }
}

/// Provenance recorded alongside a graph and carried through export.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub family: Option<Family>,
    pub level: Option<u32>,
    #[serde(default)]
    pub wired: bool,
    /// Family-specific extreme points (gasket corners, Vicsek outer leaves).
    #[serde(default)]
    pub corners: Vec<usize>,
    /// Vertices identified when wiring; for a wired graph the single wired vertex.
    #[serde(default)]
    pub boundary: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
    measure: Vec<f64>,
    total_mass: f64,
    coords: Vec<Option<Point>>,
    meta: GraphMeta,
}

/// Builds a graph whose vertex set is `0..=max id` appearing in `edges`.
pub fn build_graph(edges: &[(usize, usize, f64)]) -> Result<WeightedGraph> {
    let n = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let edges: Vec<Edge> = edges.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect();
    WeightedGraph::from_edges(n, edges)
}

impl WeightedGraph {
    /// Validating constructor over an explicit vertex count.
    pub fn from_edges(num_vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::with_coords(num_vertices, edges, vec![None; num_vertices], GraphMeta::default())
    }

    pub fn with_coords(
        num_vertices: usize,
        edges: Vec<Edge>,
        coords: Vec<Option<Point>>,
        meta: GraphMeta,
    ) -> Result<Self> {
        if num_vertices < 2 {
            return Err(Error::TooFewVertices(num_vertices));
        }
        if coords.len() != num_vertices {
            return Err(Error::MissingValue {
                expected: num_vertices,
                got: coords.len(),
            });
        }
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); num_vertices];
        for e in &edges {
            if e.u >= num_vertices {
                return Err(Error::UnknownVertex(e.u));
            }
            if e.v >= num_vertices {
                return Err(Error::UnknownVertex(e.v));
            }
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u));
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::NonpositiveWeight {
                    u: e.u,
                    v: e.v,
                    weight: e.weight,
                });
            }
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
        }
        for (x, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_by_key(|&(y, _)| y);
            if let Some(w) = nbrs.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::DuplicateEdge(x.min(w[0].0), x.max(w[0].0)));
            }
        }
        let measure: Vec<f64> = adjacency
            .iter()
            .map(|nbrs| nbrs.iter().map(|&(_, w)| w).sum())
            .collect();
        let total_mass = measure.iter().sum();
        let g = WeightedGraph {
            edges,
            adjacency,
            measure,
            total_mass,
            coords,
            meta,
        };
        let components = g.component_count();
        if components != 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        Ok(g)
    }

    fn component_count(&self) -> usize {
        let n = self.num_vertices();
        let mut seen = vec![false; n];
        let mut components = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adjacency[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        components
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `x` with conductances, sorted by neighbour id.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    /// Vertex measure `mu_x`, the sum of incident conductances.
    pub fn measure(&self, x: usize) -> f64 {
        self.measure[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    /// Total mass `m(G)`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Conductance of `{x, y}`, zero when not an edge.
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.adjacency[x]
            .binary_search_by_key(&y, |&(z, _)| z)
            .map(|i| self.adjacency[x][i].1)
            .unwrap_or(0.0)
    }

    pub fn coords(&self) -> &[Option<Point>] {
        &self.coords
    }

    pub fn coord(&self, x: usize) -> Option<Point> {
        self.coords[x]
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    pub fn is_tree(&self) -> bool {
        self.num_edges() + 1 == self.num_vertices()
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(x))
        }
    }

    /// Hop distances from `source` to every vertex.
    pub fn bfs_distances(&self, source: usize) -> Result<Vec<usize>> {
        self.check_vertex(source)?;
        let mut dist = vec![usize::MAX; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adjacency[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        Ok(dist)
    }

    /// Histogram of vertex degrees.
    pub fn degree_profile(&self) -> BTreeMap<usize, usize> {
        let mut profile = BTreeMap::new();
        for x in 0..self.num_vertices() {
            *profile.entry(self.degree(x)).or_insert(0) += 1;
        }
        profile
    }
}

/// Unweighted shortest-path distance `d_G(x, y)`.
pub fn graph_distance(g: &WeightedGraph, x: usize, y: usize) -> Result<usize> {
    g.check_vertex(y)?;
    Ok(g.bfs_distances(x)?[y])
}

/// All-pairs hop distances, row-major `n x n`.
pub fn all_pairs_graph_distance(g: &WeightedGraph) -> Vec<usize> {
    let n = g.num_vertices();
    let mut out = Vec::with_capacity(n * n);
    for x in 0..n {
        out.extend(g.bfs_distances(x).expect("vertex in range"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_sums_on_path() {
        let g = build_graph(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(g.measures(), &[1.0, 2.0, 1.0]);
        assert_eq!(g.total_mass(), 4.0);
    }

    #[test]
    fn single_heavy_edge() {
        let g = build_graph(&[(0, 1, 2.0)]).unwrap();
        assert_eq!(g.measure(0), 2.0);
        assert_eq!(g.measure(1), 2.0);
        assert_eq!(g.total_mass(), 4.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_graph(&[(0, 1, 1.0), (2, 3, 1.0)]),
            Err(Error::DisconnectedGraph { components: 2 })
        ));
        assert!(matches!(
            build_graph(&[(0, 1, 0.0)]),
            Err(Error::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            build_graph(&[(0, 1, -1.0)]),
            Err(Error::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            build_graph(&[(0, 1, 1.0), (1, 1, 1.0)]),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            build_graph(&[(0, 1, 1.0), (1, 0, 1.0)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(build_graph(&[]), Err(Error::TooFewVertices(0))));
        assert!(matches!(
            WeightedGraph::from_edges(3, vec![Edge::new(0, 1, 1.0)]),
            Err(Error::DisconnectedGraph { .. })
        ));
    }

    #[test]
    fn weight_lookup_is_symmetric() {
        let g = build_graph(&[(0, 1, 1.5), (1, 2, 0.5)]).unwrap();
        assert_eq!(g.weight(0, 1), 1.5);
        assert_eq!(g.weight(1, 0), 1.5);
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn distances() {
        let g = build_graph(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(graph_distance(&g, 0, 3).unwrap(), 3);
        assert_eq!(graph_distance(&g, 2, 2).unwrap(), 0);
        let tri = build_graph(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                if x != y {
                    assert_eq!(graph_distance(&tri, x, y).unwrap(), 1);
                }
            }
        }
        assert!(matches!(graph_distance(&g, 0, 9), Err(Error::UnknownVertex(9))));
    }
}
