//! Graph JSON input.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexInput {
    pub id: i64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeInput {
    pub u: i64,
    pub v: i64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusInput {
    pub width: usize,
    pub height: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GraphInput {
    Torus {
        torus: TorusInput,
    },
    Planar {
        vertices: Vec<VertexInput>,
        edges: Vec<EdgeInput>,
        #[serde(default)]
        boundary_vertices: Option<Vec<i64>>,
    },
}

impl GraphInput {
    pub fn from_json(text: &str) -> std::result::Result<GraphInput, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn from_graph(g: &Graph) -> GraphInput {
        let vertices = (0..g.n_vertices())
            .map(|v| {
                let p = g.position(v);
                VertexInput { id: g.vertex_id(v), x: p[0], y: p[1] }
            })
            .collect();
        let edges = (0..g.n_edges())
            .map(|k| {
                let (a, b) = g.ends(k);
                EdgeInput { u: g.vertex_id(a), v: g.vertex_id(b), weight: g.weight(k) }
            })
            .collect();
        let boundary_vertices = Some(g.boundary_vertices().into_iter().map(|v| g.vertex_id(v)).collect());
        GraphInput::Planar { vertices, edges, boundary_vertices }
    }

    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphInput::Torus { torus } => Graph::torus(torus.width, torus.height, torus.weight),
            GraphInput::Planar { vertices, edges, boundary_vertices } => {
                let mut index = HashMap::new();
                for (i, v) in vertices.iter().enumerate() {
                    if index.insert(v.id, i).is_some() {
                        return Err(Error::DuplicateVertexId(v.id));
                    }
                }
                let look = |id: i64| index.get(&id).copied().ok_or(Error::Invalid(format!("unknown vertex id {id}")));
                let ids = vertices.iter().map(|v| v.id).collect();
                let pos = vertices.iter().map(|v| [v.x, v.y]).collect();
                let e = edges.iter().map(|e| Ok((look(e.u)?, look(e.v)?))).collect::<Result<Vec<_>>>()?;
                let w = edges.iter().map(|e| e.weight).collect();
                let bd = match boundary_vertices {
                    Some(b) => Some(b.iter().map(|&id| look(id)).collect::<Result<Vec<_>>>()?),
                    None => None,
                };
                Graph::planar_with_ids(ids, pos, e, w, bd)
            }
        }
    }
}
