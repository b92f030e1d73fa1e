use serde::{Deserialize, Serialize};

use super::{argmax_first, check_query, ClassifyError, LabeledDataset, Result};

// Gains at or below this are treated as zero and stop growth.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 8, min_leaf: 2 }
    }
}

/// Axis-aligned test `x[feature] <= threshold` (true goes left).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf { label: usize, counts: Vec<usize> },
    Internal { split: Split, left: usize, right: usize },
}

/// Binary tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub dim: usize,
    pub n_classes: usize,
    pub params: TreeParams,
    pub nodes: Vec<TreeNode>,
}

pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

pub fn tree_fit(data: &LabeledDataset, params: &TreeParams) -> Result<TreeModel> {
    if params.min_leaf == 0 {
        return Err(ClassifyError::InvalidParameter("min_leaf must be at least 1".into()));
    }
    let mut model = TreeModel { dim: data.dim(), n_classes: data.n_classes(), params: *params, nodes: Vec::new() };
    let all: Vec<usize> = (0..data.len()).collect();
    grow(&mut model, data, &all, 0);
    Ok(model)
}

fn counts_of(data: &LabeledDataset, idx: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; data.n_classes()];
    for &i in idx {
        counts[data.labels()[i]] += 1;
    }
    counts
}

fn grow(model: &mut TreeModel, data: &LabeledDataset, idx: &[usize], depth: usize) -> usize {
    let counts = counts_of(data, idx);
    let me = model.nodes.len();
    model.nodes.push(TreeNode::Leaf { label: argmax_first(&counts), counts: counts.clone() });
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= model.params.max_depth || idx.len() < 2 * model.params.min_leaf {
        return me;
    }
    let Some(split) = best_split(data, idx, &counts, model.params.min_leaf) else {
        return me;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| data.features()[i][split.feature] <= split.threshold);
    let left = grow(model, data, &l, depth + 1);
    let right = grow(model, data, &r, depth + 1);
    model.nodes[me] = TreeNode::Internal { split, left, right };
    me
}

/// Best Gini split over all features and midpoint thresholds; ties keep the
/// lowest feature index, then the lowest threshold.
pub(crate) fn best_split(data: &LabeledDataset, idx: &[usize], counts: &[usize], min_leaf: usize) -> Option<Split> {
    let n = idx.len();
    let parent = gini(counts);
    let mut best: Option<Split> = None;
    for f in 0..data.dim() {
        let mut col: Vec<(f64, usize)> = idx.iter().map(|&i| (data.features()[i][f], data.labels()[i])).collect();
        col.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = vec![0; counts.len()];
        for k in 0..n - 1 {
            left[col[k].1] += 1;
            let (lo, hi) = (col[k].0, col[k + 1].0);
            if lo == hi {
                continue;
            }
            let nl = k + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
            let gain = parent - (nl as f64 * gini(&left) + nr as f64 * gini(&right)) / n as f64;
            if gain > MIN_GAIN && best.is_none_or(|b| gain > b.gain) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Split { feature: f, threshold, gain });
            }
        }
    }
    best
}

impl TreeModel {
    fn leaf(&self, x: &[f64]) -> &TreeNode {
        let mut node = &self.nodes[0];
        while let TreeNode::Internal { split, left, right } = node {
            node = &self.nodes[if x[split.feature] <= split.threshold { *left } else { *right }];
        }
        node
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        check_query(self.dim, x)?;
        match self.leaf(x) {
            TreeNode::Leaf { label, .. } => Ok(*label),
            TreeNode::Internal { .. } => unreachable!("descent ends at a leaf"),
        }
    }

    /// Class frequencies at the leaf reached by `x`.
    pub fn leaf_fractions(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_query(self.dim, x)?;
        match self.leaf(x) {
            TreeNode::Leaf { counts, .. } => {
                let n: usize = counts.iter().sum();
                Ok(counts.iter().map(|&c| c as f64 / n as f64).collect())
            }
            TreeNode::Internal { .. } => unreachable!("descent ends at a leaf"),
        }
    }

    pub fn root_split(&self) -> Option<Split> {
        match &self.nodes[0] {
            TreeNode::Internal { split, .. } => Some(*split),
            TreeNode::Leaf { .. } => None,
        }
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
