//! Undirected metric graphs with integer edge lengths.
//!
//! All-pairs shortest paths are computed once at construction; every other
//! module only ever reads `dist`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Weighted edge `(u, v, len)` as it appears on disk.
pub type Edge = (Vertex, Vertex, i64);

/// Connected undirected graph plus its shortest-path closure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphSpec", into = "GraphSpec")]
pub struct MetricGraph {
    n: usize,
    edges: Vec<Edge>,
    dist: Vec<i64>,
    diameter: i64,
}

/// On-disk form: `{"n": int, "edges": [[u, v, len], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<Edge>,
}

impl TryFrom<GraphSpec> for MetricGraph {
    type Error = Error;

    fn try_from(spec: GraphSpec) -> Result<Self> {
        MetricGraph::build(spec.n, &spec.edges)
    }
}

impl From<MetricGraph> for GraphSpec {
    fn from(g: MetricGraph) -> Self {
        GraphSpec { n: g.n, edges: g.edges }
    }
}

const INF: i64 = i64::MAX / 4;

impl MetricGraph {
    /// Builds the closure of an edge list. Parallel edges keep their minimum
    /// length and self-loops are dropped.
    pub fn build(n: usize, edges: &[Edge]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut dist = vec![INF; n * n];
        for v in 0..n {
            dist[v * n + v] = 0;
        }
        let mut kept: Vec<Edge> = Vec::with_capacity(edges.len());
        for &(u, v, len) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if len < 1 {
                return Err(Error::NonPositiveEdge { u, v, len });
            }
            if u == v {
                continue;
            }
            if len < dist[u * n + v] {
                dist[u * n + v] = len;
                dist[v * n + u] = len;
            }
            kept.push((u, v, len));
        }

        // Floyd-Warshall; n is small everywhere this crate is used.
        for k in 0..n {
            for i in 0..n {
                let dik = dist[i * n + k];
                if dik >= INF {
                    continue;
                }
                for j in 0..n {
                    let cand = dik + dist[k * n + j];
                    if cand < dist[i * n + j] {
                        dist[i * n + j] = cand;
                    }
                }
            }
        }
        if let Some(v) = (0..n).find(|&v| dist[v] >= INF) {
            return Err(Error::DisconnectedGraph(v));
        }
        let diameter = dist.iter().copied().max().unwrap_or(0);
        Ok(MetricGraph { n, edges: kept, dist, diameter })
    }

    /// Complete graph on `n` vertices with every edge of length `len`.
    pub fn uniform(n: usize, len: i64) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v, len));
            }
        }
        Self::build(n, &edges)
    }

    /// Path `0 - 1 - ... - (n-1)` with edges of length `len`.
    pub fn line(n: usize, len: i64) -> Result<Self> {
        let edges: Vec<Edge> = (1..n).map(|v| (v - 1, v, len)).collect();
        Self::build(n, &edges)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, u: Vertex, v: Vertex) -> i64 {
        self.dist[u * self.n + v]
    }

    #[inline]
    pub fn diameter(&self) -> i64 {
        self.diameter
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v < self.n
    }

    /// Vertices within distance `radius` of `v`, in increasing id order.
    pub fn ball(&self, v: Vertex, radius: i64) -> Vec<Vertex> {
        (0..self.n).filter(|&u| self.dist(v, u) <= radius).collect()
    }
}
