//! Kruskal's algorithm over a disjoint-set forest.

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Edge, SimilarityGraph};
use crate::error::{Error, Result};

/// Union-find with union by size and path halving.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`. Returns false when they were already
    /// joined, i.e. an edge between them would close a cycle.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanOrder {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    nodes: Vec<String>,
    /// In the order Kruskal accepted them.
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    unique: bool,
}

impl SpanningTree {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Whether no other spanning tree reaches the same total weight.
    pub fn is_unique(&self) -> bool {
        self.unique
    }

    /// Edge endpoints as sorted index pairs, sorted.
    pub fn edge_set(&self) -> Vec<(usize, usize)> {
        let mut set: Vec<_> = self.edges.iter().map(|e| (e.a, e.b)).collect();
        set.sort_unstable();
        set
    }

    /// Tree edges on the unique path between `from` and `to`.
    fn path_edges(&self, from: usize, to: usize, weights: &[Vec<(usize, f64)>]) -> Vec<f64> {
        let n = self.nodes.len();
        let mut prev: Vec<Option<(usize, f64)>> = vec![None; n];
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([from]);
        visited[from] = true;
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &(v, w) in &weights[u] {
                if !visited[v] {
                    visited[v] = true;
                    prev[v] = Some((u, w));
                    queue.push_back(v);
                }
            }
        }
        let mut out = Vec::new();
        let mut cur = to;
        while let Some((p, w)) = prev[cur] {
            out.push(w);
            cur = p;
        }
        out
    }
}

/// Deterministic edge order: by weight (descending for maximum trees), then
/// by the lexicographic (smaller name, larger name) pair of endpoint names.
fn edge_order<'a>(
    g: &'a SimilarityGraph,
    order: SpanOrder,
) -> impl FnMut(&&'a Edge, &&'a Edge) -> Ordering {
    let key = move |e: &Edge| {
        let (x, y) = (&g.nodes[e.a], &g.nodes[e.b]);
        if x <= y {
            (x, y)
        } else {
            (y, x)
        }
    };
    move |l, r| {
        let by_weight = match order {
            SpanOrder::Maximum => r.weight.total_cmp(&l.weight),
            SpanOrder::Minimum => l.weight.total_cmp(&r.weight),
        };
        by_weight.then_with(|| key(l).cmp(&key(r)))
    }
}

/// Kruskal: walk edges in order, keep each one that does not close a cycle,
/// stop at |V| - 1 edges.
pub fn spanning_tree(g: &SimilarityGraph, order: SpanOrder) -> Result<SpanningTree> {
    let n = g.n_nodes();
    let mut sorted: Vec<&Edge> = g.edges.iter().collect();
    sorted.sort_by(edge_order(g, order));

    let mut forest = DisjointSet::new(n);
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    let mut in_tree = vec![false; sorted.len()];
    for (idx, e) in sorted.iter().enumerate() {
        if chosen.len() + 1 >= n {
            break;
        }
        if forest.union(e.a, e.b) {
            chosen.push(**e);
            in_tree[idx] = true;
        }
    }
    if chosen.len() + 1 != n && n > 0 {
        return Err(Error::Disconnected {
            reached: chosen.len() + 1,
            total: n,
        });
    }

    let mut adjacency = vec![Vec::new(); n];
    let mut weighted = vec![Vec::new(); n];
    for e in &chosen {
        adjacency[e.a].push(e.b);
        adjacency[e.b].push(e.a);
        weighted[e.a].push((e.b, e.weight));
        weighted[e.b].push((e.a, e.weight));
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    let mut tree = SpanningTree {
        nodes: g.nodes.clone(),
        edges: chosen,
        adjacency,
        unique: true,
    };

    // The optimum is unique iff every non-tree edge is strictly worse than
    // every tree edge on the cycle it would close.
    tree.unique = sorted
        .iter()
        .zip(&in_tree)
        .filter(|(_, &t)| !t)
        .all(|(e, _)| {
            tree.path_edges(e.a, e.b, &weighted)
                .into_iter()
                .all(|w| match order {
                    SpanOrder::Maximum => e.weight < w,
                    SpanOrder::Minimum => e.weight > w,
                })
        });
    Ok(tree)
}

pub fn maximum_spanning_tree(g: &SimilarityGraph) -> Result<SpanningTree> {
    spanning_tree(g, SpanOrder::Maximum)
}

pub fn minimum_spanning_tree(g: &SimilarityGraph) -> Result<SpanningTree> {
    spanning_tree(g, SpanOrder::Minimum)
}
