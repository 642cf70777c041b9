//! Binary classification tree grown by greedy Gini-impurity splits.
//!
//! Every tie is broken deterministically: candidate splits are scanned in
//! (feature, threshold) order and only a strict impurity improvement
//! replaces the incumbent, so the lowest feature index and then the lowest
//! threshold wins; leaves with tied class counts predict class 0.

use crate::classify::LabeledSet;
use crate::data::Label;
use crate::error::{Result as CrateResult, TrainError};

type Result<T> = std::result::Result<T, TrainError>;

#[derive(Debug, Clone, PartialEq)]
pub enum CartNode {
    Leaf {
        label: Label,
        /// Training points that reached this leaf.
        count: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Points with value < threshold.
        left: Box<CartNode>,
        /// Points with value >= threshold.
        right: Box<CartNode>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartModel {
    pub root: CartNode,
    pub min_leaf: usize,
    dim: usize,
}

impl CartModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict(&self, x: &[f64]) -> CrateResult<Label> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::Error::InvalidInput(
                "prediction input must be finite".into(),
            ));
        }
        let mut node = &self.root;
        loop {
            match node {
                CartNode::Leaf { label, .. } => return Ok(*label),
                CartNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] >= *threshold { right } else { left };
                }
            }
        }
    }

    /// Number of leaves, mostly useful in tests.
    pub fn n_leaves(&self) -> usize {
        fn walk(node: &CartNode) -> usize {
            match node {
                CartNode::Leaf { .. } => 1,
                CartNode::Split { left, right, .. } => walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }
}

/// Gini impurity of a node holding `n0` class-0 and `n1` class-1 points.
fn gini(n0: usize, n1: usize) -> f64 {
    let n = (n0 + n1) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = n0 as f64 / n;
    let p1 = n1 as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

/// Majority label; ties go to class 0.
fn majority(n0: usize, n1: usize) -> Label {
    if n1 > n0 { Label::Left } else { Label::Right }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    weighted: f64,
}

/// Finds the admissible split minimizing child-impurity mass, scanning
/// features then thresholds in ascending order and keeping the first
/// strict minimum.
fn best_split(set: &LabeledSet, rows: &[usize], min_leaf: usize) -> Option<BestSplit> {
    let dim = set.dim();
    let mut best: Option<BestSplit> = None;
    let mut order: Vec<usize> = Vec::with_capacity(rows.len());
    for feature in 0..dim {
        order.clear();
        order.extend_from_slice(rows);
        order.sort_by(|&a, &b| {
            set.vectors[a].values[feature]
                .partial_cmp(&set.vectors[b].values[feature])
                .unwrap()
        });
        // Left counts when cutting after sorted position i (first i+1 rows).
        let mut left0 = 0usize;
        let mut left1 = 0usize;
        let total1: usize = rows
            .iter()
            .filter(|&&r| set.vectors[r].label == Label::Left)
            .count();
        let total0 = rows.len() - total1;
        for i in 0..order.len() - 1 {
            match set.vectors[order[i]].label {
                Label::Right => left0 += 1,
                Label::Left => left1 += 1,
            }
            let lo = set.vectors[order[i]].values[feature];
            let hi = set.vectors[order[i + 1]].values[feature];
            if lo == hi {
                continue;
            }
            let n_left = i + 1;
            let n_right = rows.len() - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let threshold = lo + 0.5 * (hi - lo);
            let weighted = n_left as f64 * gini(left0, left1)
                + n_right as f64 * gini(total0 - left0, total1 - left1);
            let better = match &best {
                None => true,
                Some(b) => weighted < b.weighted,
            };
            if better {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    weighted,
                });
            }
        }
    }
    best
}

fn grow(set: &LabeledSet, rows: &[usize], min_leaf: usize) -> CartNode {
    let n1 = rows
        .iter()
        .filter(|&&r| set.vectors[r].label == Label::Left)
        .count();
    let n0 = rows.len() - n1;
    let leaf = CartNode::Leaf {
        label: majority(n0, n1),
        count: rows.len(),
    };
    if n0 == 0 || n1 == 0 || rows.len() < 2 * min_leaf {
        return leaf;
    }
    let Some(split) = best_split(set, rows, min_leaf) else {
        return leaf;
    };
    // Splitting must strictly reduce impurity mass.
    if split.weighted >= rows.len() as f64 * gini(n0, n1) - 1e-12 {
        return leaf;
    }
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| set.vectors[r].values[split.feature] < split.threshold);
    CartNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(set, &left_rows, min_leaf)),
        right: Box::new(grow(set, &right_rows, min_leaf)),
    }
}

/// Grows a tree. `min_leaf` is the smallest admissible child size.
pub fn train_cart(set: &LabeledSet, min_leaf: usize) -> Result<CartModel> {
    set.check_trainable()?;
    if min_leaf == 0 {
        return Err(TrainError::InvalidParam("cart min_leaf must be at least 1".into()));
    }
    let rows: Vec<usize> = (0..set.len()).collect();
    Ok(CartModel {
        root: grow(set, &rows, min_leaf),
        min_leaf,
        dim: set.dim(),
    })
}
