//! Louvain modularity maximization.
//!
//! Modularity is the weighted Newman-Girvan form with resolution 1:
//! `Q = 1/(2m) * sum_ij [w_ij - k_i k_j / (2m)] * [c_i == c_j]`.
//!
//! The local-move phase visits nodes in index order and moves each one to the
//! neighbouring community with the largest gain above `min_gain`, ties going
//! to the smaller community id. Communities are then collapsed into weighted
//! super-nodes (intra-community weight becomes a self-loop) and the two
//! phases repeat until a level makes no move.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;

pub const DEFAULT_MIN_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityPartition {
    pub nodes: Vec<String>,
    /// Community id per node, dense from 0 in order of first appearance.
    pub assignment: Vec<usize>,
    pub modularity: f64,
    /// Aggregation levels that moved at least one node.
    pub levels: usize,
}

impl CommunityPartition {
    pub fn community_of(&self, node: &str) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n == node)
            .map(|i| self.assignment[i])
    }

    pub fn n_communities(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    /// Node names grouped by community id.
    pub fn members(&self) -> Vec<Vec<String>> {
        let mut groups = vec![Vec::new(); self.n_communities()];
        for (name, &c) in self.nodes.iter().zip(&self.assignment) {
            groups[c].push(name.clone());
        }
        groups
    }
}

/// Relabels ids to 0..c-1 in order of first appearance.
pub fn canonical_labels(assignment: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    assignment
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// Weighted modularity of `assignment` (one community id per node).
pub fn modularity(g: &SimilarityGraph, assignment: &[usize]) -> Result<f64> {
    if assignment.len() != g.n_nodes() {
        let missing = g
            .nodes()
            .get(assignment.len())
            .cloned()
            .unwrap_or_else(|| format!("#{}", assignment.len()));
        return Err(Error::UncoveredNode(missing));
    }
    let two_m = 2.0 * g.total_weight();
    if two_m <= 0.0 {
        return Err(Error::InvalidGraph("total edge weight is zero".into()));
    }
    let mut strength = vec![0.0; g.n_nodes()];
    for e in g.edges() {
        strength[e.a] += e.weight;
        strength[e.b] += e.weight;
    }
    let n_comm = assignment.iter().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; n_comm];
    let mut total = vec![0.0; n_comm];
    for e in g.edges() {
        if assignment[e.a] == assignment[e.b] {
            internal[assignment[e.a]] += 2.0 * e.weight;
        }
    }
    for (i, &c) in assignment.iter().enumerate() {
        total[c] += strength[i];
    }
    let q = internal
        .iter()
        .zip(&total)
        .map(|(&inn, &tot)| inn / two_m - (tot / two_m) * (tot / two_m))
        .sum();
    Ok(q)
}

/// Working graph for one Louvain level: adjacency without self-loops plus a
/// separate self-loop weight per node.
struct Level {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
}

impl Level {
    fn from_graph(g: &SimilarityGraph) -> Self {
        let n = g.n_nodes();
        let mut adjacency = vec![Vec::new(); n];
        for e in g.edges() {
            if e.weight > 0.0 {
                adjacency[e.a].push((e.b, e.weight));
                adjacency[e.b].push((e.a, e.weight));
            }
        }
        Level {
            adjacency,
            self_loops: vec![0.0; n],
        }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }

    fn strength(&self, i: usize) -> f64 {
        self.adjacency[i].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_loops[i]
    }

    /// One local-move phase. Returns the community of every node and whether
    /// anything moved.
    fn local_moves(&self, two_m: f64, min_gain: f64) -> (Vec<usize>, bool) {
        let n = self.len();
        let strength: Vec<f64> = (0..n).map(|i| self.strength(i)).collect();
        let mut community: Vec<usize> = (0..n).collect();
        let mut total = strength.clone();
        let mut moved_any = false;
        let mut links: HashMap<usize, f64> = HashMap::new();

        loop {
            let mut moved = false;
            for i in 0..n {
                let own = community[i];
                let k_i = strength[i];

                links.clear();
                for &(j, w) in &self.adjacency[i] {
                    *links.entry(community[j]).or_insert(0.0) += w;
                }
                total[own] -= k_i;

                // gain of joining c, up to the common factor 1/m
                let gain = |c: usize, k_in: f64| k_in - total[c] * k_i / two_m;
                let stay = gain(own, links.get(&own).copied().unwrap_or(0.0));

                let mut candidates: Vec<(usize, f64)> =
                    links.iter().map(|(&c, &w)| (c, w)).collect();
                candidates.sort_unstable_by_key(|&(c, _)| c);

                let mut best = own;
                let mut best_gain = 0.0;
                for (c, k_in) in candidates {
                    if c == own {
                        continue;
                    }
                    let delta = (gain(c, k_in) - stay) * 2.0 / two_m;
                    if delta > min_gain && delta > best_gain {
                        best = c;
                        best_gain = delta;
                    }
                }

                total[best] += k_i;
                if best != own {
                    community[i] = best;
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        (community, moved_any)
    }

    /// Collapses communities into super-nodes.
    fn aggregate(&self, community: &[usize], n_comm: usize) -> Level {
        let mut self_loops = vec![0.0; n_comm];
        let mut between: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n_comm];
        for (i, &ci) in community.iter().enumerate() {
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adjacency[i] {
                let cj = community[j];
                if ci == cj {
                    // each internal edge is seen from both ends
                    self_loops[ci] += w / 2.0;
                } else {
                    *between[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adjacency = between
            .into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().collect();
                v.sort_unstable_by_key(|&(c, _)| c);
                v
            })
            .collect();
        Level {
            adjacency,
            self_loops,
        }
    }
}

/// Louvain community detection on a weighted graph.
pub fn louvain(g: &SimilarityGraph, min_gain: f64) -> Result<CommunityPartition> {
    let n = g.n_nodes();
    let nodes = g.nodes().to_vec();
    let two_m = 2.0 * g.total_weight();
    if n <= 1 || two_m <= 0.0 {
        return Ok(CommunityPartition {
            nodes,
            assignment: vec![0; n],
            modularity: 0.0,
            levels: 0,
        });
    }

    let mut flat: Vec<usize> = (0..n).collect();
    let mut level = Level::from_graph(g);
    let mut levels = 0;
    loop {
        let (community, moved) = level.local_moves(two_m, min_gain);
        if !moved {
            break;
        }
        levels += 1;
        let community = canonical_labels(&community);
        let n_comm = community.iter().max().map_or(0, |m| m + 1);
        for c in flat.iter_mut() {
            *c = community[*c];
        }
        if n_comm == level.len() {
            break;
        }
        level = level.aggregate(&community, n_comm);
    }

    let mut assignment = canonical_labels(&flat);
    let mut q = modularity(g, &assignment)?;
    // greedy moves can strand the result below the trivial partition
    if q < 0.0 {
        assignment = vec![0; n];
        q = modularity(g, &assignment)?;
    }
    Ok(CommunityPartition {
        nodes,
        assignment,
        modularity: q,
        levels,
    })
}
