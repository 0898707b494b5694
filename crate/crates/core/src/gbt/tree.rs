use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoostParams, GbtError, Result};
use crate::data::Matrix;
use crate::scalar::Scalar;

/// Regression tree node. Rows with `value <= threshold` go left.
///
/// `cover` is the hessian mass routed to the node; an internal node's cover
/// is exactly the sum of its children's. Leaf weights already include the
/// learning-rate shrinkage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Scalar")]
pub enum TreeNode<T> {
    Split {
        feature: usize,
        threshold: T,
        cover: T,
        left: Box<TreeNode<T>>,
        right: Box<TreeNode<T>>,
    },
    Leaf {
        leaf: T,
        cover: T,
    },
}

impl<T: Scalar> TreeNode<T> {
    pub fn cover(&self) -> T {
        match self {
            TreeNode::Split { cover, .. } | TreeNode::Leaf { cover, .. } => *cover,
        }
    }

    #[inline]
    pub fn predict(&self, row: &[T]) -> T {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { leaf, .. } => return *leaf,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Calls `f` on every split feature index, preorder.
    pub fn visit_splits(&self, f: &mut impl FnMut(usize, T)) {
        if let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } = self
        {
            f(*feature, *threshold);
            left.visit_splits(f);
            right.visit_splits(f);
        }
    }

    /// True when every internal cover equals its children's sum.
    pub fn covers_consistent(&self) -> bool {
        match self {
            TreeNode::Leaf { .. } => true,
            TreeNode::Split {
                cover, left, right, ..
            } => {
                *cover == left.cover() + right.cover()
                    && left.covers_consistent()
                    && right.covers_consistent()
            }
        }
    }
}

/// Fits one tree to gradients and hessians by exact greedy search over
/// midpoints between consecutive distinct feature values.
pub fn fit_tree<T: Scalar>(
    features: &Matrix<T>,
    gradients: &[T],
    hessians: &[T],
    params: &BoostParams,
) -> Result<TreeNode<T>> {
    params.validate()?;
    let orders = sorted_orders(features);
    Ok(build_tree(features, &orders, gradients, hessians, params)?.0)
}

/// Each column's `(value, row)` pairs sorted by value, then row.
pub(crate) type SortedColumn<T> = Vec<(T, u32)>;

pub(crate) fn sorted_orders<T: Scalar>(x: &Matrix<T>) -> Vec<SortedColumn<T>> {
    (0..x.n_cols())
        .into_par_iter()
        .map(|j| {
            let mut col: SortedColumn<T> = (0..x.n_rows()).map(|r| (x.get(r, j), r as u32)).collect();
            col.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.1.cmp(&b.1))
            });
            col
        })
        .collect()
}

struct Proto<T> {
    grad: T,
    hess: T,
    split: Option<(usize, T, usize, usize)>,
}

#[derive(Clone, Copy)]
struct Candidate<T> {
    gain: T,
    threshold: T,
}

#[derive(Clone, Copy)]
struct ScanState<T> {
    gl: T,
    hl: T,
    last: T,
    seen: bool,
    best: Option<Candidate<T>>,
}

const INACTIVE: u32 = u32::MAX;
const PARALLEL_ROWS: usize = 4096;

/// Builds level by level: every level scans each presorted column once and
/// updates the running statistics of whichever open node each row sits in.
/// Rows that settle in a leaf are dropped from the columns for later levels.
/// Returns the tree and each row's leaf value.
pub(crate) fn build_tree<T: Scalar>(
    x: &Matrix<T>,
    orders: &[SortedColumn<T>],
    g: &[T],
    h: &[T],
    params: &BoostParams,
) -> Result<(TreeNode<T>, Vec<T>)> {
    let n = x.n_rows();
    if n == 0 {
        return Err(GbtError::EmptyInput);
    }
    if g.len() != n || h.len() != n {
        return Err(GbtError::Misaligned {
            expected: n,
            found: g.len().min(h.len()),
        });
    }
    let d = x.n_cols();
    let lambda = T::lit(params.l2_reg);
    let gamma = T::lit(params.min_split_gain);
    let min_h = T::lit(params.min_child_hessian);
    let half = T::lit(0.5);
    let score = |gs: T, hs: T| gs * gs / (hs + lambda);

    let mut nodes = vec![Proto {
        grad: g.iter().copied().sum(),
        hess: h.iter().copied().sum(),
        split: None,
    }];
    let mut position = vec![0u32; n];
    let mut active: Vec<usize> = vec![0];
    let mut compacted: Option<Vec<SortedColumn<T>>> = None;
    let gh: Vec<(T, T)> = g.iter().copied().zip(h.iter().copied()).collect();

    for level in 0..params.max_depth {
        if active.is_empty() {
            break;
        }
        let mut slot_of = vec![INACTIVE; nodes.len()];
        for (s, &v) in active.iter().enumerate() {
            slot_of[v] = s as u32;
        }
        let row_slot: Vec<u32> = position.iter().map(|&v| slot_of[v as usize]).collect();
        let compact = level > 0;
        let totals: Vec<(T, T, T)> = active
            .iter()
            .map(|&v| (nodes[v].grad, nodes[v].hess, score(nodes[v].grad, nodes[v].hess)))
            .collect();
        let cols: &[SortedColumn<T>] = compacted.as_deref().unwrap_or(orders);

        let scan = |j: usize| -> (Vec<Option<Candidate<T>>>, SortedColumn<T>) {
            let mut st = vec![
                ScanState {
                    gl: T::zero(),
                    hl: T::zero(),
                    last: T::zero(),
                    seen: false,
                    best: None,
                };
                active.len()
            ];
            let mut kept = Vec::with_capacity(if compact { cols[j].len() } else { 0 });
            for &(v, r) in &cols[j] {
                let s = row_slot[r as usize];
                if s == INACTIVE {
                    continue;
                }
                if compact {
                    kept.push((v, r));
                }
                let (gi, hi) = gh[r as usize];
                let state = &mut st[s as usize];
                if state.seen && v > state.last {
                    let (gt, ht, parent) = totals[s as usize];
                    let (gl, hl) = (state.gl, state.hl);
                    let (gr, hr) = (gt - gl, ht - hl);
                    if hl >= min_h && hr >= min_h {
                        let gain = half * (score(gl, hl) + score(gr, hr) - parent) - gamma;
                        if gain > T::zero() && state.best.is_none_or(|b| gain > b.gain) {
                            let mut mid = state.last + (v - state.last) * half;
                            if mid >= v {
                                mid = state.last;
                            }
                            state.best = Some(Candidate { gain, threshold: mid });
                        }
                    }
                }
                state.gl += gi;
                state.hl += hi;
                state.last = v;
                state.seen = true;
            }
            (st.into_iter().map(|s| s.best).collect(), kept)
        };
        let scanned: Vec<(Vec<Option<Candidate<T>>>, SortedColumn<T>)> = if n >= PARALLEL_ROWS && d > 1 {
            (0..d).into_par_iter().map(scan).collect()
        } else {
            (0..d).map(scan).collect()
        };
        let (per_feature, kept): (Vec<_>, Vec<_>) = scanned.into_iter().unzip();
        if compact {
            compacted = Some(kept);
        }

        let mut next = Vec::new();
        let mut split_of = vec![None; nodes.len()];
        for (s, &v) in active.iter().enumerate() {
            let mut best: Option<(usize, Candidate<T>)> = None;
            for (j, cands) in per_feature.iter().enumerate() {
                if let Some(c) = cands[s] {
                    if best.is_none_or(|(_, b)| c.gain > b.gain) {
                        best = Some((j, c));
                    }
                }
            }
            if let Some((j, c)) = best {
                let left = nodes.len();
                nodes.push(Proto { grad: T::zero(), hess: T::zero(), split: None });
                nodes.push(Proto { grad: T::zero(), hess: T::zero(), split: None });
                nodes[v].split = Some((j, c.threshold, left, left + 1));
                split_of[v] = Some((j, c.threshold, left));
                next.push(left);
                next.push(left + 1);
            }
        }
        if next.is_empty() {
            break;
        }
        for r in 0..n {
            let v = position[r] as usize;
            if let Some(Some((j, thr, left))) = split_of.get(v) {
                let child = if x.get(r, *j) <= *thr { *left } else { left + 1 };
                position[r] = child as u32;
                nodes[child].grad += g[r];
                nodes[child].hess += h[r];
            }
        }
        active = next;
    }

    let eta = T::lit(params.learning_rate);
    let leaf_weight = |p: &Proto<T>| -p.grad / (p.hess + lambda) * eta;
    let row_values = position.iter().map(|&v| leaf_weight(&nodes[v as usize])).collect();
    Ok((assemble(&nodes, 0, &leaf_weight), row_values))
}

fn assemble<T: Scalar>(nodes: &[Proto<T>], v: usize, weight: &impl Fn(&Proto<T>) -> T) -> TreeNode<T> {
    match nodes[v].split {
        None => TreeNode::Leaf {
            leaf: weight(&nodes[v]),
            cover: nodes[v].hess,
        },
        Some((feature, threshold, l, r)) => {
            let left = assemble(nodes, l, weight);
            let right = assemble(nodes, r, weight);
            TreeNode::Split {
                feature,
                threshold,
                cover: left.cover() + right.cover(),
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    }
}
