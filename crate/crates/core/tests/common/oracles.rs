//! Brute-force reference implementations, written independently of the
//! library code they check.

use featnet::graph::{Edge, SimilarityGraph};

/// Rank of each value: number of smaller values plus the mean position
/// within its tie group.
pub fn ranks_by_counting(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let less = values.iter().filter(|&&u| u < v).count() as f64;
            let equal = values.iter().filter(|&&u| u == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Textbook Pearson: (n Sxy - Sx Sy) / sqrt((n Sxx - Sx^2)(n Syy - Sy^2)).
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks_by_counting(x), &ranks_by_counting(y))
}

/// Best spanning-tree weight and edge set by trying every (n-1)-subset of
/// edges. Edge pairs are (min, max) index pairs, sorted.
pub fn brute_force_max_tree(n: usize, edges: &[(usize, usize, f64)]) -> (f64, Vec<(usize, usize)>) {
    let m = edges.len();
    let need = n - 1;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut chosen: Vec<usize> = (0..need).collect();
    if need == 0 {
        return (0.0, Vec::new());
    }
    loop {
        if is_spanning_tree(n, chosen.iter().map(|&i| (edges[i].0, edges[i].1))) {
            let w: f64 = chosen.iter().map(|&i| edges[i].2).sum();
            if w > best.0 {
                let mut set: Vec<(usize, usize)> = chosen
                    .iter()
                    .map(|&i| (edges[i].0.min(edges[i].1), edges[i].0.max(edges[i].1)))
                    .collect();
                set.sort_unstable();
                best = (w, set);
            }
        }
        // advance to the next combination in lexicographic order
        let mut i = need;
        while i > 0 && chosen[i - 1] == m - need + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best;
        }
        chosen[i - 1] += 1;
        for j in i..need {
            chosen[j] = chosen[j - 1] + 1;
        }
    }
}

/// n-1 edges form a spanning tree iff they connect every node; checked with a
/// plain graph search.
fn is_spanning_tree(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut adj = vec![Vec::new(); n];
    for (a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Modularity by the double sum over ordered node pairs.
pub fn modularity_oracle(n: usize, edges: &[(usize, usize, f64)], labels: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        a[i][j] += w;
        a[j][i] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            let next_max = if c > max { c } else { max };
            rec(prefix, next_max, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut prefix = vec![0];
    rec(&mut prefix, 0, n, &mut out);
    out
}

pub fn best_modularity(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    all_partitions(n)
        .iter()
        .map(|p| modularity_oracle(n, edges, p))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn graph_from(n: usize, edges: &[(usize, usize, f64)]) -> SimilarityGraph {
    SimilarityGraph::new(
        (0..n).map(|i| format!("n{i}")).collect(),
        edges
            .iter()
            .map(|&(a, b, weight)| Edge { a, b, weight })
            .collect(),
    )
    .unwrap()
}
