//! DOT, GraphML and CSV renderings of a spanning tree.

use std::fmt::Write;

use super::{DegreeDistribution, HubReport, SpanningTree};
use crate::community::CommunityPartition;

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn sorted_edges(t: &SpanningTree) -> Vec<(usize, usize, f64)> {
    let mut edges: Vec<_> = t.edges().iter().map(|e| (e.a, e.b, e.weight)).collect();
    edges.sort_by_key(|&(a, b, _)| (a, b));
    edges
}

/// Undirected DOT graph. Nodes carry `community`, hubs get `shape=box`, and
/// edges carry `weight` with six decimals.
pub fn to_dot(
    name: &str,
    t: &SpanningTree,
    partition: &CommunityPartition,
    hubs: &HubReport,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {} {{", dot_id(name));
    for node in t.nodes() {
        let community = partition.community_of(node).unwrap_or(usize::MAX);
        let shape = if hubs.is_hub(node) { ", shape=box" } else { "" };
        let _ = writeln!(out, "  {} [community={community}{shape}];", dot_id(node));
    }
    let nodes = t.nodes();
    for (a, b, w) in sorted_edges(t) {
        let _ = writeln!(
            out,
            "  {} -- {} [weight=\"{w:.6}\"];",
            dot_id(&nodes[a]),
            dot_id(&nodes[b])
        );
    }
    out.push_str("}\n");
    out
}

/// GraphML with the same attributes as [`to_dot`].
pub fn to_graphml(
    name: &str,
    t: &SpanningTree,
    partition: &CommunityPartition,
    hubs: &HubReport,
) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n");
    out.push_str("  <key id=\"shape\" for=\"node\" attr.name=\"shape\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    let _ = writeln!(
        out,
        "  <graph id=\"{}\" edgedefault=\"undirected\">",
        xml_escape(name)
    );
    let nodes = t.nodes();
    for (i, node) in nodes.iter().enumerate() {
        let community = partition
            .community_of(node)
            .map_or_else(|| "-1".to_string(), |c| c.to_string());
        let _ = writeln!(out, "    <node id=\"n{i}\">");
        let _ = writeln!(out, "      <data key=\"label\">{}</data>", xml_escape(node));
        let _ = writeln!(out, "      <data key=\"community\">{community}</data>");
        if hubs.is_hub(node) {
            out.push_str("      <data key=\"shape\">box</data>\n");
        }
        out.push_str("    </node>\n");
    }
    for (idx, (a, b, w)) in sorted_edges(t).into_iter().enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{idx}\" source=\"n{a}\" target=\"n{b}\"><data key=\"weight\">{w:.6}</data></edge>"
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// `k,count,pk` rows, ascending in `k`.
pub fn degree_distribution_csv(dist: &DegreeDistribution) -> String {
    let mut out = String::from("k,count,pk\n");
    for e in &dist.entries {
        let _ = writeln!(out, "{},{},{:?}", e.k, e.count, e.pk);
    }
    out
}
