//! Gradient-boosted regression trees with logistic loss.
//!
//! Each round fits one tree to the gradient and hessian of the log loss at
//! the current margins. Splits are found exactly and level by level; a split
//! is scored by `G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)` and a leaf takes
//! the Newton weight `-G/(H+l)`, where `l` is the L2 penalty.

use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum hessian sum in each child of a split.
    pub min_child_weight: f64,
    /// Minimum loss reduction for a split.
    pub min_split_gain: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_rounds: 200,
            learning_rate: 0.1,
            max_depth: 4,
            lambda: 1.0,
            min_child_weight: 1.0,
            min_split_gain: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(w) => return w,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] < threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtClassifier {
    base_margin: f64,
    learning_rate: f64,
    trees: Vec<Tree>,
    /// Mean training log loss before the first round and after each round.
    pub loss_curve: Vec<f64>,
}

impl GbtClassifier {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base_margin
            + self.learning_rate * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    /// Probability of the positive class.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }

    /// Predicted label code: 1 when the probability is at least 0.5, else -1.
    pub fn predict(&self, row: &[f64]) -> i8 {
        if self.predict_proba(row) >= 0.5 {
            1
        } else {
            -1
        }
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_loss(margins: &[f64], targets: &[f64]) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(targets)
        // ln(1 + e^m) - y m, written to avoid overflow
        .map(|(&m, &y)| m.max(0.0) + (-m.abs()).exp().ln_1p() - y * m)
        .sum();
    total / margins.len() as f64
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    sorted: &'a [Vec<usize>],
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a GbtParams,
}

impl TreeBuilder<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.params.lambda)
    }

    fn leaf(&self, g: f64, h: f64) -> f64 {
        -g / (h + self.params.lambda)
    }

    fn build(&self) -> Tree {
        let n = self.x.n_rows();
        let d = self.x.n_cols();
        let mut nodes = vec![Node::Leaf(0.0)];
        // tree node of every row, for rows still in an open node
        let mut node_of: Vec<Option<usize>> = vec![Some(0); n];
        let (g0, h0) = (self.grad.iter().sum(), self.hess.iter().sum());
        let mut open: Vec<(usize, f64, f64)> = vec![(0, g0, h0)];

        for _depth in 0..self.params.max_depth {
            if open.is_empty() {
                break;
            }
            let mut slot = vec![usize::MAX; nodes.len()];
            for (s, &(node, _, _)) in open.iter().enumerate() {
                slot[node] = s;
            }
            let mut best: Vec<Option<Candidate>> = vec![None; open.len()];
            let mut left_g = vec![0.0; open.len()];
            let mut left_h = vec![0.0; open.len()];
            let mut last: Vec<Option<f64>> = vec![None; open.len()];

            for f in 0..d {
                left_g.iter_mut().for_each(|v| *v = 0.0);
                left_h.iter_mut().for_each(|v| *v = 0.0);
                last.iter_mut().for_each(|v| *v = None);
                for &r in &self.sorted[f] {
                    let Some(node) = node_of[r] else { continue };
                    let s = slot[node];
                    let value = self.x.get(r, f);
                    if let Some(prev) = last[s] {
                        if value != prev {
                            let (_, g, h) = open[s];
                            let (gl, hl) = (left_g[s], left_h[s]);
                            let (gr, hr) = (g - gl, h - hl);
                            if hl >= self.params.min_child_weight
                                && hr >= self.params.min_child_weight
                            {
                                let gain = 0.5
                                    * (self.score(gl, hl) + self.score(gr, hr) - self.score(g, h))
                                    - self.params.min_split_gain;
                                if gain > 1e-12 && best[s].is_none_or(|b| gain > b.gain) {
                                    best[s] = Some(Candidate {
                                        gain,
                                        feature: f,
                                        threshold: 0.5 * (prev + value),
                                    });
                                }
                            }
                        }
                    }
                    left_g[s] += self.grad[r];
                    left_h[s] += self.hess[r];
                    last[s] = Some(value);
                }
            }

            let mut next = Vec::new();
            let mut child_of = vec![(usize::MAX, usize::MAX); open.len()];
            for (s, &(node, g, h)) in open.iter().enumerate() {
                match best[s] {
                    None => nodes[node] = Node::Leaf(self.leaf(g, h)),
                    Some(c) => {
                        let left = nodes.len();
                        nodes.push(Node::Leaf(0.0));
                        nodes.push(Node::Leaf(0.0));
                        nodes[node] = Node::Split {
                            feature: c.feature,
                            threshold: c.threshold,
                            left,
                            right: left + 1,
                        };
                        child_of[s] = (left, left + 1);
                    }
                }
            }
            let mut sums = vec![(0.0, 0.0); nodes.len()];
            for (r, assigned) in node_of.iter_mut().enumerate() {
                let Some(node) = *assigned else { continue };
                let s = slot[node];
                *assigned = match best[s] {
                    None => None,
                    Some(c) => {
                        let (l, rt) = child_of[s];
                        let child = if self.x.get(r, c.feature) < c.threshold { l } else { rt };
                        sums[child].0 += self.grad[r];
                        sums[child].1 += self.hess[r];
                        Some(child)
                    }
                };
            }
            for &(l, r) in &child_of {
                if l != usize::MAX {
                    next.push((l, sums[l].0, sums[l].1));
                    next.push((r, sums[r].0, sums[r].1));
                }
            }
            open = next;
        }
        for (node, g, h) in open {
            nodes[node] = Node::Leaf(self.leaf(g, h));
        }
        Tree { nodes }
    }
}

/// Trains a binary classifier; label codes greater than 0 are the positive
/// class.
pub fn train_gbt(x: &Matrix, labels: &[i8], params: &GbtParams) -> Result<GbtClassifier> {
    let n = x.n_rows();
    if n != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{n} rows but {} labels",
            labels.len()
        )));
    }
    if params.learning_rate <= 0.0 || params.lambda < 0.0 {
        return Err(Error::InvalidArgument(
            "learning rate must be positive and lambda non-negative".into(),
        ));
    }
    let targets: Vec<f64> = labels.iter().map(|&l| if l > 0 { 1.0 } else { 0.0 }).collect();
    let positives: f64 = targets.iter().sum();
    if positives == 0.0 || positives == n as f64 {
        return Err(Error::DegenerateLabels);
    }
    let rate = positives / n as f64;
    let base_margin = (rate / (1.0 - rate)).ln();

    let sorted: Vec<Vec<usize>> = (0..x.n_cols())
        .map(|f| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
            idx
        })
        .collect();

    let mut margins = vec![base_margin; n];
    let mut loss_curve = vec![log_loss(&margins, &targets)];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            grad[i] = p - targets[i];
            hess[i] = (p * (1.0 - p)).max(1e-16);
        }
        let tree = TreeBuilder {
            x,
            sorted: &sorted,
            grad: &grad,
            hess: &hess,
            params,
        }
        .build();
        for (i, m) in margins.iter_mut().enumerate() {
            *m += params.learning_rate * tree.predict(x.row(i));
        }
        loss_curve.push(log_loss(&margins, &targets));
        trees.push(tree);
    }

    Ok(GbtClassifier {
        base_margin,
        learning_rate: params.learning_rate,
        trees,
        loss_curve,
    })
}
