//! Weighted graphs, graph shift operators and the graph Fourier transform.

mod knn;
mod shift;

pub use knn::{knn_gaussian_graph, Metric};
pub use shift::{build_laplacian, ShiftOperator};

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const KARATE_EDGES: &str = include_str!("../../data/karate_edges.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: usize, dst: usize, weight: f64) -> Self {
        Edge { src, dst, weight }
    }
}

/// A weighted graph on vertices `0..n`.
///
/// Undirected graphs keep each edge once with `src < dst`. Repeated or
/// reversed copies of an edge are merged when their weights agree.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    directed: bool,
    labels: Option<Vec<String>>,
    coords: Option<Vec<[f64; 2]>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>, directed: bool) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::validation(format!(
                    "edge ({}, {}) references a vertex outside 0..{n}",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(Error::validation(format!("self-loop at vertex {}", e.src)));
            }
            if !e.weight.is_finite() {
                return Err(Error::validation(format!(
                    "non-finite weight on edge ({}, {})",
                    e.src, e.dst
                )));
            }
            if e.weight < 0.0 {
                return Err(Error::validation(format!(
                    "negative weight {} on edge ({}, {})",
                    e.weight, e.src, e.dst
                )));
            }
            let key = if directed {
                (e.src, e.dst)
            } else {
                (e.src.min(e.dst), e.src.max(e.dst))
            };
            if let Some(&w) = merged.get(&key) {
                if w != e.weight {
                    return Err(Error::validation(format!(
                        "edge ({}, {}) given with conflicting weights {w} and {}",
                        key.0, key.1, e.weight
                    )));
                }
            }
            merged.insert(key, e.weight);
        }
        let edges = merged
            .into_iter()
            .map(|((src, dst), weight)| Edge { src, dst, weight })
            .collect();
        Ok(Graph {
            n,
            edges,
            directed,
            labels: None,
            coords: None,
        })
    }

    pub fn undirected(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        Self::new(n, edges, false)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        crate::error::check_len("vertex labels", self.n, labels.len())?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_coords(mut self, coords: Vec<[f64; 2]>) -> Result<Self> {
        crate::error::check_len("vertex coordinates", self.n, coords.len())?;
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    /// Dense weighted adjacency matrix W.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            w[(e.src, e.dst)] = e.weight;
            if !self.directed {
                w[(e.dst, e.src)] = e.weight;
            }
        }
        w
    }

    /// Connectivity over edges of positive weight, ignoring direction.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut nbrs = vec![Vec::new(); self.n];
        for e in self.edges.iter().filter(|e| e.weight > 0.0) {
            nbrs[e.src].push(e.dst);
            nbrs[e.dst].push(e.src);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &nbrs[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Zachary's karate club: 34 members, 78 unweighted friendships.
pub fn builtin_karate() -> Graph {
    let edges = crate::io::parse_edge_list(KARATE_EDGES.as_bytes())
        .expect("bundled karate edge list is well formed");
    Graph::undirected(34, edges).expect("bundled karate edge list is valid")
}
