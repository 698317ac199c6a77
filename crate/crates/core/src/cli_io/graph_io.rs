//! Graph files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "vertices": [{"id": 0, "x": 0.0, "y": 0.0}, ...],
//!   "edges": [{"u": 0, "v": 1, "w": "1"}, ...],
//!   "meta": {"family": "gasket", "level": 2, "wired": false, "corners": [...], "boundary": []}
//! }
//! ```
//!
//! Weights are decimal strings in shortest round-trip form, so reading a file
//! back yields bit-identical conductances. Vertex ids must be `0..n` in order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::write_atomic;
use crate::error::{Error, Result};
use crate::graphs::{Edge, GraphMeta, WeightedGraph};

const GRAPH_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexRecord {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    u: usize,
    v: usize,
    w: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    schema_version: u32,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
    #[serde(default)]
    meta: GraphMeta,
}

pub fn graph_to_json(g: &WeightedGraph) -> String {
    let file = GraphFile {
        schema_version: GRAPH_SCHEMA_VERSION,
        vertices: g
            .coords()
            .iter()
            .enumerate()
            .map(|(id, c)| VertexRecord {
                id,
                x: c.map(|p| p[0]),
                y: c.map(|p| p[1]),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeRecord {
                u: e.u,
                v: e.v,
                w: e.weight.to_string(),
            })
            .collect(),
        meta: g.meta().clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("graph serializes");
    s.push('\n');
    s
}

pub fn graph_from_json(text: &str) -> Result<WeightedGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if file.schema_version != GRAPH_SCHEMA_VERSION {
        return Err(Error::Schema(format!("unsupported graph schema version {}", file.schema_version)));
    }
    let mut coords = Vec::with_capacity(file.vertices.len());
    for (k, v) in file.vertices.iter().enumerate() {
        if v.id != k {
            return Err(Error::Schema(format!("vertex {k} has id {}", v.id)));
        }
        coords.push(match (v.x, v.y) {
            (Some(x), Some(y)) => Some([x, y]),
            (None, None) => None,
            _ => return Err(Error::Schema(format!("vertex {k} has only one coordinate"))),
        });
    }
    let edges = file
        .edges
        .iter()
        .map(|e| {
            let w: f64 = e
                .w
                .parse()
                .map_err(|_| Error::Schema(format!("edge ({}, {}) has weight `{}`", e.u, e.v, e.w)))?;
            Ok(Edge::new(e.u, e.v, w))
        })
        .collect::<Result<Vec<_>>>()?;
    WeightedGraph::with_coords(coords.len(), edges, coords, file.meta)
        .map_err(|e| Error::Schema(format!("invalid graph: {e}")))
}

pub fn export_graph(g: &WeightedGraph, path: &Path) -> Result<()> {
    write_atomic(path, graph_to_json(g).as_bytes())
}

pub fn import_graph(path: &Path) -> Result<WeightedGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    graph_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_graph, generate, Family, FamilySpec};

    #[test]
    fn gasket_round_trip() {
        let g = generate(FamilySpec::new(Family::Gasket, 2)).unwrap();
        let back = graph_from_json(&graph_to_json(&g)).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn awkward_weights_round_trip() {
        let g = build_graph(&[(0, 1, 1.0 / 3.0), (1, 2, 0.1 + 0.2), (0, 2, 1e-300)]).unwrap();
        assert_eq!(graph_from_json(&graph_to_json(&g)).unwrap(), g);
    }

    #[test]
    fn malformed_input_is_a_schema_error() {
        for text in [
            "{",
            "{\"schema_version\": 1}",
            "{\"schema_version\": 1, \"vertices\": [{\"id\": 1}], \"edges\": []}",
            "{\"schema_version\": 1, \"vertices\": [{\"id\": 0}, {\"id\": 1}], \"edges\": [{\"u\": 0, \"v\": 1, \"w\": \"heavy\"}]}",
            "{\"schema_version\": 1, \"vertices\": [{\"id\": 0}, {\"id\": 1}], \"edges\": [{\"u\": 0, \"v\": 1, \"w\": \"-1\"}]}",
        ] {
            assert!(matches!(graph_from_json(text), Err(Error::Schema(_))), "{text}");
        }
    }
}
