use serde::{Deserialize, Serialize};

use super::{ExplainError, Result, ShapMatrix};
use crate::data::stratified_kfold_labels;
use crate::eval::MeanStd;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub cv_folds: usize,
    pub seed: u64,
}

impl Default for CartConfig {
    fn default() -> Self {
        Self {
            max_depth: 4,
            min_leaf: 20,
            cv_folds: 10,
            seed: 0,
        }
    }
}

/// Rows with `value < threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CartNode {
    Split {
        feature: usize,
        threshold: f64,
        counts: [usize; 2],
        class: u8,
        left: Box<CartNode>,
        right: Box<CartNode>,
    },
    Leaf {
        counts: [usize; 2],
        class: u8,
    },
}

impl CartNode {
    pub fn counts(&self) -> [usize; 2] {
        match self {
            CartNode::Split { counts, .. } | CartNode::Leaf { counts, .. } => *counts,
        }
    }

    pub fn class(&self) -> u8 {
        match self {
            CartNode::Split { class, .. } | CartNode::Leaf { class, .. } => *class,
        }
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        let mut node = self;
        loop {
            match node {
                CartNode::Leaf { class, .. } => return *class,
                CartNode::Split { feature, threshold, left, right, .. } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            CartNode::Leaf { .. } => 0,
            CartNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            CartNode::Leaf { .. } => 1,
            CartNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

/// CART surrogate over SHAP values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationTree {
    pub feature_names: Vec<String>,
    pub config: CartConfig,
    pub root: CartNode,
    pub n_train: usize,
    pub training_accuracy: f64,
    /// Agreement with the ensemble's predicted class (margin ≥ 0).
    pub fidelity: f64,
    /// `None` when the fold plan could not be built.
    pub cv_accuracy: Option<MeanStd>,
}

impl ExplanationTree {
    pub fn predict(&self, phi: &[f64]) -> u8 {
        self.root.predict(phi)
    }
}

fn majority(counts: [usize; 2]) -> u8 {
    u8::from(counts[1] > counts[0])
}

fn gini_mass(c: [usize; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (a, b) = (c[0] as f64, c[1] as f64);
    n - (a * a + b * b) / n
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    cfg: CartConfig,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> [usize; 2] {
        let pos = rows.iter().filter(|&&r| self.y[r] == 1).count();
        [rows.len() - pos, pos]
    }

    fn best_split(&self, rows: &[usize], counts: [usize; 2]) -> Option<(usize, f64)> {
        let parent = gini_mass(counts);
        let d = self.x.first().map_or(0, Vec::len);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = rows.to_vec();
        for j in 0..d {
            order.sort_by(|&a, &b| self.x[a][j].total_cmp(&self.x[b][j]).then(a.cmp(&b)));
            let mut left = [0usize; 2];
            for s in 1..order.len() {
                left[self.y[order[s - 1]] as usize] += 1;
                let (lo, hi) = (self.x[order[s - 1]][j], self.x[order[s]][j]);
                if lo == hi || s < self.cfg.min_leaf || order.len() - s < self.cfg.min_leaf {
                    continue;
                }
                let right = [counts[0] - left[0], counts[1] - left[1]];
                let gain = parent - gini_mass(left) - gini_mass(right);
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    let mut t = lo + (hi - lo) / 2.0;
                    if t <= lo {
                        t = hi;
                    }
                    best = Some((gain, j, t));
                }
            }
        }
        best.map(|(_, j, t)| (j, t))
    }

    fn build(&self, rows: &[usize], depth: usize) -> CartNode {
        let counts = self.counts(rows);
        let class = majority(counts);
        if depth >= self.cfg.max_depth || counts[0] == 0 || counts[1] == 0 {
            return CartNode::Leaf { counts, class };
        }
        let Some((feature, threshold)) = self.best_split(rows, counts) else {
            return CartNode::Leaf { counts, class };
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.x[i][feature] < threshold);
        CartNode::Split {
            feature,
            threshold,
            counts,
            class,
            left: Box::new(self.build(&l, depth + 1)),
            right: Box::new(self.build(&r, depth + 1)),
        }
    }
}

fn fit_rows(x: &[Vec<f64>], y: &[u8], rows: &[usize], cfg: CartConfig) -> CartNode {
    Builder { x, y, cfg }.build(rows, 0)
}

fn accuracy(root: &CartNode, x: &[Vec<f64>], y: &[u8], rows: &[usize]) -> f64 {
    let hits = rows.iter().filter(|&&r| root.predict(&x[r]) == y[r]).count();
    hits as f64 / rows.len() as f64
}

/// Gini CART with SHAP values as predictors and the true labels as target.
pub fn fit_shap_cart<T: Scalar>(sm: &ShapMatrix<T>, labels: &[u8], cfg: CartConfig) -> Result<ExplanationTree> {
    if labels.len() != sm.n_rows() {
        return Err(ExplainError::RowMismatch {
            what: "labels",
            expected: sm.n_rows(),
            found: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(ExplainError::SingleClass);
    }
    let x: Vec<Vec<f64>> = sm
        .rows
        .iter()
        .map(|r| r.phi.iter().map(|v| v.as_f64()).collect())
        .collect();
    let all: Vec<usize> = (0..labels.len()).collect();
    let root = fit_rows(&x, labels, &all, cfg);

    let training_accuracy = accuracy(&root, &x, labels, &all);
    let agree = sm
        .rows
        .iter()
        .zip(&x)
        .filter(|(r, phi)| root.predict(phi) == u8::from(r.margin >= T::zero()))
        .count();
    let fidelity = agree as f64 / labels.len() as f64;

    let cv_accuracy = stratified_kfold_labels(labels, cfg.cv_folds, cfg.seed)
        .ok()
        .map(|plan| {
            let per_fold: Vec<Option<f64>> = (0..plan.k)
                .map(|f| {
                    let train = plan.train_indices(f);
                    let test = plan.test_indices(f);
                    let tree = fit_rows(&x, labels, &train, cfg);
                    Some(accuracy(&tree, &x, labels, &test))
                })
                .collect();
            MeanStd::of(per_fold)
        });

    Ok(ExplanationTree {
        feature_names: sm.feature_names.clone(),
        config: cfg,
        root,
        n_train: labels.len(),
        training_accuracy,
        fidelity,
        cv_accuracy,
    })
}
