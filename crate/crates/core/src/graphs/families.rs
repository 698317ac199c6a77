//! Generators for the self-similar graph families.
//!
//! Every fractal family is built by iterating its contraction maps on exact
//! integer lattice coordinates; vertices produced by several copies are
//! identified by coordinate equality and keep the id of their first
//! occurrence. Canonical orders:
//!
//! * `path`: `0, 1, ..., n` from left to right.
//! * `gasket`: level 0 is `(0,0), (1,0), (1/2, sqrt 3/2)`; level `i` lists the
//!   bottom-left, bottom-right, then top copy of level `i-1`. Edges are the
//!   images of the level-0 triangle, i.e. the sides of the smallest triangles.
//! * `vicsek`: level 0 is the centre then the corners `(0,0), (1,0), (0,1), (1,1)`
//!   joined to the centre; level `i` lists the copies in the bottom-left,
//!   bottom-right, centre, top-left, top-right squares.
//! * `carpet`: level 0 is the 8 centres of the outer sub-squares of the unit
//!   square, row by row from the bottom; level `i` lists the copies in the same
//!   order. Edges join centres at distance `3^-(i+1)` (cells sharing a side).
//! * `wired_carpet`: the carpet with every cell touching the outer boundary of
//!   the unit square merged into one vertex.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{wire_vertices, Edge, GraphMeta, Point, WeightedGraph};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Path,
    Vicsek,
    Gasket,
    Carpet,
    WiredCarpet,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Path => "path",
            Family::Vicsek => "vicsek",
            Family::Gasket => "gasket",
            Family::Carpet => "carpet",
            Family::WiredCarpet => "wired_carpet",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(Family::Path),
            "vicsek" => Ok(Family::Vicsek),
            "gasket" => Ok(Family::Gasket),
            "carpet" => Ok(Family::Carpet),
            "wired_carpet" | "wired-carpet" => Ok(Family::WiredCarpet),
            other => Err(Error::Parse(format!("unknown graph family `{other}`"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub level: u32,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl FamilySpec {
    pub fn new(family: Family, level: u32) -> Self {
        FamilySpec {
            family,
            level,
            weight: 1.0,
        }
    }
}

/// Upper bounds on the generated level, keeping vertex counts at desk scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelLimits {
    pub path: u32,
    pub vicsek: u32,
    pub gasket: u32,
    pub carpet: u32,
    pub wired_carpet: u32,
}

impl Default for LevelLimits {
    fn default() -> Self {
        LevelLimits {
            path: 1_000_000,
            vicsek: 6,
            gasket: 7,
            carpet: 3,
            wired_carpet: 3,
        }
    }
}

impl LevelLimits {
    pub fn max_for(&self, family: Family) -> u32 {
        match family {
            Family::Path => self.path,
            Family::Vicsek => self.vicsek,
            Family::Gasket => self.gasket,
            Family::Carpet => self.carpet,
            Family::WiredCarpet => self.wired_carpet,
        }
    }
}

pub fn generate(spec: FamilySpec) -> Result<WeightedGraph> {
    generate_with_limits(spec, &LevelLimits::default())
}

pub fn generate_with_limits(spec: FamilySpec, limits: &LevelLimits) -> Result<WeightedGraph> {
    let max = limits.max_for(spec.family);
    if spec.level > max {
        return Err(Error::LevelTooLarge {
            family: spec.family.name().to_string(),
            level: spec.level,
            max,
        });
    }
    match spec.family {
        Family::Path => path(spec.level, spec.weight),
        Family::Gasket => gasket(spec.level, spec.weight),
        Family::Vicsek => vicsek(spec.level, spec.weight),
        Family::Carpet => carpet(spec.level, spec.weight),
        Family::WiredCarpet => wired_carpet(spec.level, spec.weight),
    }
}

fn meta(family: Family, level: u32) -> GraphMeta {
    GraphMeta {
        family: Some(family),
        level: Some(level),
        ..GraphMeta::default()
    }
}

fn path(level: u32, weight: f64) -> Result<WeightedGraph> {
    if level == 0 {
        return Err(Error::InvalidLevel {
            family: "path".into(),
            level,
            reason: "a path needs at least one edge",
        });
    }
    let n = level as usize;
    let edges = (0..n).map(|k| Edge::new(k, k + 1, weight)).collect();
    let coords = (0..=n).map(|k| Some([k as f64 / n as f64, 0.0])).collect();
    let mut m = meta(Family::Path, level);
    m.corners = vec![0, n];
    WeightedGraph::with_coords(n + 1, edges, coords, m)
}

type Lattice = (i64, i64);

/// Vertices and edges of a self-similar family on an integer lattice.
struct LatticeGraph {
    points: Vec<Lattice>,
    index: HashMap<Lattice, usize>,
    edges: Vec<(usize, usize)>,
}

impl LatticeGraph {
    fn new() -> Self {
        LatticeGraph {
            points: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
        }
    }

    fn insert(&mut self, p: Lattice) -> usize {
        if let Some(&id) = self.index.get(&p) {
            return id;
        }
        let id = self.points.len();
        self.points.push(p);
        self.index.insert(p, id);
        id
    }

    /// Union of translated copies of `self`, identifying equal points and
    /// carrying the edges of every copy along.
    fn copies(&self, offsets: &[Lattice]) -> LatticeGraph {
        let mut out = LatticeGraph::new();
        let mut seen = std::collections::HashSet::new();
        for &(dx, dy) in offsets {
            let ids: Vec<usize> = self
                .points
                .iter()
                .map(|&(x, y)| out.insert((x + dx, y + dy)))
                .collect();
            for &(u, v) in &self.edges {
                let key = (ids[u].min(ids[v]), ids[u].max(ids[v]));
                if seen.insert(key) {
                    out.edges.push(key);
                }
            }
        }
        out
    }

    fn sorted_edges(&self, weight: f64) -> Vec<Edge> {
        let mut pairs: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        pairs.sort_unstable();
        pairs.into_iter().map(|(u, v)| Edge::new(u, v, weight)).collect()
    }
}

fn gasket_lattice(level: u32) -> LatticeGraph {
    let mut g = LatticeGraph::new();
    for p in [(0, 0), (1, 0), (0, 1)] {
        g.insert(p);
    }
    g.edges = vec![(0, 1), (1, 2), (0, 2)];
    for i in 1..=level {
        let h = 1i64 << (i - 1);
        g = g.copies(&[(0, 0), (h, 0), (0, h)]);
    }
    g
}

fn gasket(level: u32, weight: f64) -> Result<WeightedGraph> {
    let g = gasket_lattice(level);
    let scale = (1u64 << level) as f64;
    let half_sqrt3 = 3f64.sqrt() / 2.0;
    let coords = g
        .points
        .iter()
        .map(|&(a, b)| {
            Some([
                (a as f64 + b as f64 / 2.0) / scale,
                b as f64 * half_sqrt3 / scale,
            ])
        })
        .collect();
    let side = 1i64 << level;
    let mut m = meta(Family::Gasket, level);
    m.corners = vec![g.index[&(0, 0)], g.index[&(side, 0)], g.index[&(0, side)]];
    WeightedGraph::with_coords(g.points.len(), g.sorted_edges(weight), coords, m)
}

fn vicsek(level: u32, weight: f64) -> Result<WeightedGraph> {
    let mut g = LatticeGraph::new();
    for p in [(1, 1), (0, 0), (2, 0), (0, 2), (2, 2)] {
        g.insert(p);
    }
    g.edges = vec![(0, 1), (0, 2), (0, 3), (0, 4)];
    for i in 1..=level {
        let s = 2 * 3i64.pow(i - 1);
        g = g.copies(&[(0, 0), (2 * s, 0), (s, s), (0, 2 * s), (2 * s, 2 * s)]);
    }
    let w = 2 * 3i64.pow(level);
    let coords = g
        .points
        .iter()
        .map(|&(a, b)| Some([a as f64 / w as f64, b as f64 / w as f64]))
        .collect();
    let mut m = meta(Family::Vicsek, level);
    m.corners = vec![
        g.index[&(0, 0)],
        g.index[&(w, 0)],
        g.index[&(0, w)],
        g.index[&(w, w)],
    ];
    WeightedGraph::with_coords(g.points.len(), g.sorted_edges(weight), coords, m)
}

/// Carpet cells on the lattice of half cell widths: centres have odd
/// coordinates in `1..2*3^(level+1)`.
fn carpet_lattice(level: u32) -> LatticeGraph {
    const CELLS: [Lattice; 8] = [(0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2), (2, 2)];
    let mut g = LatticeGraph::new();
    for (a, b) in CELLS {
        g.insert((2 * a + 1, 2 * b + 1));
    }
    for i in 1..=level {
        let s = 2 * 3i64.pow(i);
        let offsets: Vec<Lattice> = CELLS.iter().map(|&(a, b)| (a * s, b * s)).collect();
        g = g.copies(&offsets);
    }
    for (u, &(x, y)) in g.points.iter().enumerate() {
        for (dx, dy) in [(2, 0), (0, 2)] {
            if let Some(&v) = g.index.get(&(x + dx, y + dy)) {
                g.edges.push((u, v));
            }
        }
    }
    g
}

fn carpet(level: u32, weight: f64) -> Result<WeightedGraph> {
    let g = carpet_lattice(level);
    let w = 2 * 3i64.pow(level + 1);
    let coords = g
        .points
        .iter()
        .map(|&(a, b)| Some([a as f64 / w as f64, b as f64 / w as f64]))
        .collect();
    let mut m = meta(Family::Carpet, level);
    m.boundary = g
        .points
        .iter()
        .enumerate()
        .filter(|&(_, &(a, b))| a == 1 || b == 1 || a == w - 1 || b == w - 1)
        .map(|(id, _)| id)
        .collect();
    WeightedGraph::with_coords(g.points.len(), g.sorted_edges(weight), coords, m)
}

fn wired_carpet(level: u32, weight: f64) -> Result<WeightedGraph> {
    if level == 0 {
        return Err(Error::InvalidLevel {
            family: "wired_carpet".into(),
            level,
            reason: "every level-0 cell touches the boundary, wiring leaves one vertex",
        });
    }
    let base = carpet(level, weight)?;
    let boundary = base.meta().boundary.clone();
    let q = wire_vertices(&base, &boundary)?;
    let mut g = q.graph;
    g.meta = GraphMeta {
        family: Some(Family::WiredCarpet),
        level: Some(level),
        wired: true,
        corners: Vec::new(),
        boundary: vec![q.merged],
    };
    Ok(g)
}

/// Euclidean distance between two points.
pub fn euclid(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
