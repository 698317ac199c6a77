use std::collections::BTreeMap;

use super::{Edge, GraphMeta, WeightedGraph};
use crate::error::{Error, Result};

/// Result of identifying a vertex set: the quotient graph and where every
/// original vertex went.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub graph: WeightedGraph,
    /// `map[x]` is the id of original vertex `x` in the quotient.
    pub map: Vec<usize>,
    /// Id of the merged vertex.
    pub merged: usize,
}

/// Merges `set` into a single vertex. Parallel edges created by the merge are
/// combined by summing conductances, edges inside `set` are dropped.
///
/// The merged vertex takes the position of the smallest id in `set`; other
/// vertices keep their relative order.
pub fn wire_vertices(g: &WeightedGraph, set: &[usize]) -> Result<Quotient> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = g.num_vertices();
    let mut in_set = vec![false; n];
    for &x in set {
        g.check_vertex(x)?;
        in_set[x] = true;
    }
    let anchor = *set.iter().min().expect("nonempty");
    let mut map = vec![usize::MAX; n];
    let mut next = 0;
    for x in 0..n {
        if in_set[x] {
            if x == anchor {
                map[x] = next;
                next += 1;
            }
        } else {
            map[x] = next;
            next += 1;
        }
    }
    let merged = map[anchor];
    for x in 0..n {
        if in_set[x] {
            map[x] = merged;
        }
    }

    let mut combined: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in g.edges() {
        let (a, b) = (map[e.u], map[e.v]);
        if a == b {
            continue;
        }
        *combined.entry((a.min(b), a.max(b))).or_insert(0.0) += e.weight;
    }
    let edges = combined
        .into_iter()
        .map(|((u, v), w)| Edge::new(u, v, w))
        .collect();

    let mut coords = vec![None; next];
    for x in 0..n {
        if !in_set[x] || set.len() == 1 {
            coords[map[x]] = g.coord(x);
        }
    }
    let meta = GraphMeta {
        family: g.meta().family,
        level: g.meta().level,
        wired: true,
        corners: Vec::new(),
        boundary: vec![merged],
    };
    let graph = WeightedGraph::with_coords(next, edges, coords, meta)?;
    Ok(Quotient { graph, map, merged })
}
