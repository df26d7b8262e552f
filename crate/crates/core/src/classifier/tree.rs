//! Depth-limited regression trees fit with a squared-error split criterion.
//!
//! Split thresholds are training feature values and the routing rule is
//! `x <= threshold`, so the learned partition depends only on the order
//! statistics of each column. Splits and leaf values are searched
//! deterministically: features in index order, thresholds ascending, strictly
//! better gain to replace.

use std::io::Write;

use crate::error::{Error, Result};

/// One node of the arena; children index into the same vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl RegressionTree {
    /// Fits targets over the rows selected by `indices`.
    pub fn fit(features: &[Vec<f64>], targets: &[f64], indices: &[usize], max_depth: usize) -> Self {
        let mut nodes = Vec::new();
        let mut idx = indices.to_vec();
        Self::grow(features, targets, &mut idx, max_depth, &mut nodes);
        RegressionTree { nodes }
    }

    fn grow(
        features: &[Vec<f64>],
        targets: &[f64],
        indices: &mut [usize],
        depth_left: usize,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let mean = indices.iter().map(|&i| targets[i]).sum::<f64>() / indices.len().max(1) as f64;
        if depth_left == 0 || indices.len() < 2 {
            nodes.push(Node::Leaf { value: mean });
            return nodes.len() - 1;
        }
        let Some(split) = best_split(features, targets, indices) else {
            nodes.push(Node::Leaf { value: mean });
            return nodes.len() - 1;
        };

        // Partition in place, preserving relative order for determinism.
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
        for &i in indices.iter() {
            if features[i][split.feature] <= split.threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }

        let node_idx = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 }); // placeholder, patched below
        let left_idx = Self::grow(features, targets, &mut left, depth_left - 1, nodes);
        let right_idx = Self::grow(features, targets, &mut right, depth_left - 1, nodes);
        nodes[node_idx] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: left_idx,
            right: right_idx,
        };
        node_idx
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Preorder node listing: `split <feature> <threshold>` / `leaf <value>`.
    pub fn write_preorder(&self, w: &mut impl Write) -> Result<()> {
        fn rec(nodes: &[Node], at: usize, w: &mut impl Write) -> Result<()> {
            match &nodes[at] {
                Node::Leaf { value } => writeln!(w, "leaf {value:?}")?,
                Node::Split { feature, threshold, left, right } => {
                    writeln!(w, "split {feature} {threshold:?}")?;
                    rec(nodes, *left, w)?;
                    rec(nodes, *right, w)?;
                }
            }
            Ok(())
        }
        rec(&self.nodes, 0, w)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Rebuilds a tree from `n_nodes` preorder lines.
    pub fn parse_preorder(lines: &[&str]) -> Result<Self> {
        let bad = |reason: String| Error::Artifact {
            kind: "decision tree".into(),
            reason,
        };
        fn rec(
            lines: &[&str],
            pos: &mut usize,
            nodes: &mut Vec<Node>,
        ) -> Result<usize> {
            let bad = |reason: String| Error::Artifact {
                kind: "decision tree".into(),
                reason,
            };
            let line = lines
                .get(*pos)
                .ok_or_else(|| bad("unexpected end of node list".into()))?;
            *pos += 1;
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("leaf") => {
                    let value: f64 = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(format!("bad leaf line {line:?}")))?;
                    nodes.push(Node::Leaf { value });
                    Ok(nodes.len() - 1)
                }
                Some("split") => {
                    let feature: usize = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(format!("bad split line {line:?}")))?;
                    let threshold: f64 = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(format!("bad split line {line:?}")))?;
                    let node_idx = nodes.len();
                    nodes.push(Node::Leaf { value: 0.0 });
                    let left = rec(lines, pos, nodes)?;
                    let right = rec(lines, pos, nodes)?;
                    nodes[node_idx] = Node::Split { feature, threshold, left, right };
                    Ok(node_idx)
                }
                other => Err(bad(format!("unknown node tag {other:?}"))),
            }
        }
        let mut nodes = Vec::new();
        let mut pos = 0;
        rec(lines, &mut pos, &mut nodes)?;
        if pos != lines.len() {
            return Err(bad(format!("{} trailing node lines", lines.len() - pos)));
        }
        Ok(RegressionTree { nodes })
    }
}

/// Best squared-error split across all features, or None when no split
/// improves on the parent. Gain ties keep the earliest candidate.
fn best_split(features: &[Vec<f64>], targets: &[f64], indices: &[usize]) -> Option<SplitCandidate> {
    let n = indices.len();
    let total_sum: f64 = indices.iter().map(|&i| targets[i]).sum();
    let parent_score = total_sum * total_sum / n as f64;
    let dim = features[indices[0]].len();

    let mut best: Option<SplitCandidate> = None;
    let mut order = indices.to_vec();
    for f in 0..dim {
        order.sort_by(|&a, &b| {
            features[a][f]
                .partial_cmp(&features[b][f])
                .expect("finite features")
                .then(a.cmp(&b))
        });
        let mut left_sum = 0.0;
        for pos in 0..n - 1 {
            left_sum += targets[order[pos]];
            let here = features[order[pos]][f];
            let next = features[order[pos + 1]][f];
            if here == next {
                continue;
            }
            let n_left = (pos + 1) as f64;
            let n_right = (n - pos - 1) as f64;
            let right_sum = total_sum - left_sum;
            let gain =
                left_sum * left_sum / n_left + right_sum * right_sum / n_right - parent_score;
            if gain > 1e-12 && best.as_ref().map_or(true, |b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature: f,
                    threshold: here,
                    gain,
                });
            }
        }
    }
    best
}
