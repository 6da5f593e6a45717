//! Weighted undirected feature graphs and the trees extracted from them.

mod export;
mod gamma;
mod hubs;
mod mst;

pub use export::{degree_distribution_csv, to_dot, to_graphml};
pub use gamma::{estimate_gamma, GammaEstimate, GammaMethod};
pub use hubs::{
    degree_distribution, degrees, find_hubs, DegreeCount, DegreeDistribution, HubEntry, HubReport,
    DEFAULT_HUB_THRESHOLD,
};
pub use mst::{
    maximum_spanning_tree, minimum_spanning_tree, spanning_tree, DisjointSet, SpanOrder,
    SpanningTree,
};

use serde::{Deserialize, Serialize};

use crate::correlation::SimilarityMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Undirected weighted graph without self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

impl SimilarityGraph {
    /// Validates and normalizes the edge list so that `a < b` for every edge.
    pub fn new(nodes: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let n = nodes.len();
        let mut seen = std::collections::HashSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            if e.a >= n || e.b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a missing node",
                    e.a, e.b
                )));
            }
            if e.a == e.b {
                return Err(Error::InvalidGraph(format!("self-loop on node {}", e.a)));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has weight {}",
                    e.a, e.b, e.weight
                )));
            }
            let (a, b) = (e.a.min(e.b), e.a.max(e.b));
            if !seen.insert((a, b)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            normalized.push(Edge {
                a,
                b,
                weight: e.weight,
            });
        }
        Ok(SimilarityGraph {
            nodes,
            edges: normalized,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Same graph with every weight passed through `f`.
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> SimilarityGraph {
        SimilarityGraph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    weight: f(e.weight),
                    ..*e
                })
                .collect(),
        }
    }
}

/// Complete graph over the matrix's features; edge (i, j) carries `sim[i][j]`.
pub fn build_graph(sim: &SimilarityMatrix) -> Result<SimilarityGraph> {
    let k = sim.size();
    if k < 2 {
        return Err(Error::TooFewFeatures(k));
    }
    let mut edges = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in (a + 1)..k {
            edges.push(Edge {
                a,
                b,
                weight: sim.get(a, b),
            });
        }
    }
    Ok(SimilarityGraph {
        nodes: sim.names().to_vec(),
        edges,
    })
}
