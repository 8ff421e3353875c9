use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{check_finite, check_training_data, sigmoid, Prediction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostedParams {
    pub tree_count: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
}

impl Default for BoostedParams {
    fn default() -> Self {
        Self {
            tree_count: 100,
            max_depth: 3,
            learning_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTreesModel {
    pub trees: Vec<Tree>,
    pub learning_rate: f64,
    pub tree_count: usize,
    pub max_depth: usize,
    /// Log-odds of the training prevalence.
    pub base_score: f64,
    pub n_features: usize,
}

impl BoostedTreesModel {
    fn raw(&self, row: &[f64]) -> f64 {
        self.base_score
            + self
                .trees
                .iter()
                .map(|t| self.learning_rate * t.eval(row))
                .sum::<f64>()
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Prediction> {
        if x.ncols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        check_finite(x)?;
        let mut row = vec![0.0; self.n_features];
        let scores = x
            .rows()
            .into_iter()
            .map(|r| {
                row.iter_mut().zip(r).for_each(|(d, s)| *d = *s);
                sigmoid(self.raw(&row))
            })
            .collect();
        Ok(Prediction::from_scores(scores))
    }
}

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    /// per feature: row indices sorted by (value, row)
    order: Vec<Vec<usize>>,
    grad: Vec<f64>,
    hess: Vec<f64>,
    max_depth: usize,
    in_node: Vec<bool>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn best_split(&mut self, rows: &[usize]) -> Option<SplitChoice> {
        for &r in rows {
            self.in_node[r] = true;
        }
        let n = rows.len() as f64;
        let total: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let parent = total * total / n;
        let mut best: Option<(f64, SplitChoice)> = None;
        let mut members = Vec::with_capacity(rows.len());
        for f in 0..self.x.ncols() {
            members.clear();
            members.extend(self.order[f].iter().copied().filter(|&r| self.in_node[r]));
            let mut left_sum = 0.0;
            for k in 0..members.len() - 1 {
                left_sum += self.grad[members[k]];
                let a = self.x[[members[k], f]];
                let b = self.x[[members[k + 1], f]];
                if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = n - nl;
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
                if gain > 1e-12 && best.as_ref().is_none_or(|(g, _)| gain > *g) {
                    let mid = (a + b) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((
                        gain,
                        SplitChoice {
                            feature: f,
                            threshold,
                        },
                    ));
                }
            }
        }
        for &r in rows {
            self.in_node[r] = false;
        }
        best.map(|(_, s)| s)
    }

    fn leaf(&self, rows: &[usize]) -> Node {
        let g: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r]).sum();
        let value = if h > 1e-12 { g / h } else { 0.0 };
        Node::Leaf { value }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, nodes: &mut Vec<Node>) -> usize {
        let at = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        let split = if depth < self.max_depth && rows.len() >= 2 {
            self.best_split(&rows)
        } else {
            None
        };
        match split {
            None => nodes[at] = self.leaf(&rows),
            Some(SplitChoice { feature, threshold }) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows
                    .into_iter()
                    .partition(|&i| self.x[[i, feature]] <= threshold);
                let left = self.grow(l, depth + 1, nodes);
                let right = self.grow(r, depth + 1, nodes);
                nodes[at] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        at
    }
}

/// Gradient boosting on log-loss. Each tree is grown on the residuals
/// `y - sigmoid(F)` by variance-reduction splits at midpoints between
/// consecutive observed values; leaves take one Newton step.
pub fn train_boosted(
    x: ArrayView2<f64>,
    y: &[u8],
    tree_count: usize,
    max_depth: usize,
    learning_rate: f64,
) -> Result<BoostedTreesModel> {
    if tree_count == 0 {
        return Err(Error::InvalidArgument("tree_count must be >= 1".into()));
    }
    if max_depth == 0 {
        return Err(Error::InvalidArgument("max_depth must be >= 1".into()));
    }
    if !(learning_rate > 0.0 && learning_rate <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "learning rate {learning_rate} outside (0, 1]"
        )));
    }
    check_training_data(x, y)?;
    let n = y.len();
    let prevalence = y.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let base_score = (prevalence / (1.0 - prevalence)).ln();

    let order = (0..x.ncols())
        .map(|f| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| x[[a, f]].total_cmp(&x[[b, f]]).then(a.cmp(&b)));
            idx
        })
        .collect();
    let mut builder = Builder {
        x,
        order,
        grad: vec![0.0; n],
        hess: vec![0.0; n],
        max_depth,
        in_node: vec![false; n],
    };

    let mut raw = vec![base_score; n];
    let mut trees = Vec::with_capacity(tree_count);
    let mut row = vec![0.0; x.ncols()];
    for _ in 0..tree_count {
        for i in 0..n {
            let p = sigmoid(raw[i]);
            builder.grad[i] = y[i] as f64 - p;
            builder.hess[i] = p * (1.0 - p);
        }
        let mut nodes = Vec::new();
        builder.grow((0..n).collect(), 0, &mut nodes);
        let tree = Tree { nodes };
        for (i, r) in raw.iter_mut().enumerate() {
            row.iter_mut().zip(x.row(i)).for_each(|(d, s)| *d = *s);
            *r += learning_rate * tree.eval(&row);
        }
        trees.push(tree);
    }
    Ok(BoostedTreesModel {
        trees,
        learning_rate,
        tree_count,
        max_depth,
        base_score,
        n_features: x.ncols(),
    })
}
