use serde::{Deserialize, Serialize};

use super::SpanningTree;
use crate::community::CommunityPartition;
use crate::error::{Error, Result};

/// A node is a hub when its tree degree exceeds this.
pub const DEFAULT_HUB_THRESHOLD: usize = 2;

/// Tree degree of every node, in node order.
pub fn degrees(t: &SpanningTree) -> Vec<(String, usize)> {
    t.nodes()
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), t.degree(i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HubEntry {
    pub feature: String,
    pub degree: usize,
    pub community: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HubReport {
    pub threshold: usize,
    /// Sorted by descending degree, then feature name.
    pub entries: Vec<HubEntry>,
}

impl HubReport {
    pub fn features(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.feature.as_str()).collect()
    }

    pub fn is_hub(&self, feature: &str) -> bool {
        self.entries.iter().any(|e| e.feature == feature)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,degree,community\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::correlation::csv_field(&e.feature),
                e.degree,
                e.community
            ));
        }
        out
    }
}

/// Nodes with degree above `threshold`, annotated with their community.
pub fn find_hubs(
    t: &SpanningTree,
    partition: &CommunityPartition,
    threshold: usize,
) -> Result<HubReport> {
    let mut entries = Vec::new();
    for (i, name) in t.nodes().iter().enumerate() {
        let community = partition
            .community_of(name)
            .ok_or_else(|| Error::MissingCommunity(name.clone()))?;
        let degree = t.degree(i);
        if degree > threshold {
            entries.push(HubEntry {
                feature: name.clone(),
                degree,
                community,
            });
        }
    }
    entries.sort_by(|a, b| b.degree.cmp(&a.degree).then_with(|| a.feature.cmp(&b.feature)));
    Ok(HubReport { threshold, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeCount {
    pub k: usize,
    pub count: usize,
    pub pk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    /// One entry per observed degree, ascending in `k`.
    pub entries: Vec<DegreeCount>,
    pub n_nodes: usize,
}

/// `P(k) = n_k / n` over the observed degrees.
pub fn degree_distribution(t: &SpanningTree) -> DegreeDistribution {
    let n = t.nodes().len();
    let max_k = (0..n).map(|i| t.degree(i)).max().unwrap_or(0);
    let mut counts = vec![0usize; max_k + 1];
    for i in 0..n {
        counts[t.degree(i)] += 1;
    }
    let entries = counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(k, count)| DegreeCount {
            k,
            count,
            pk: count as f64 / n as f64,
        })
        .collect();
    DegreeDistribution {
        entries,
        n_nodes: n,
    }
}
