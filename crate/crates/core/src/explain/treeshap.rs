use rayon::prelude::*;

use super::{ExplainError, Result, ShapMatrix, ShapRow};
use crate::data::Dataset;
use crate::gbt::{GradientBoostedEnsemble, TreeNode};
use crate::scalar::Scalar;

const ROOT: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct PathElem<T> {
    feature: usize,
    zero: T,
    one: T,
    weight: T,
}

fn check_covers<T: Scalar>(node: &TreeNode<T>) -> bool {
    match node {
        TreeNode::Leaf { cover, .. } => *cover > T::zero(),
        TreeNode::Split { cover, left, right, .. } => {
            *cover > T::zero() && check_covers(left) && check_covers(right)
        }
    }
}

fn validate<T: Scalar>(model: &GradientBoostedEnsemble<T>, width: usize) -> Result<()> {
    if width != model.n_features() {
        return Err(ExplainError::SchemaMismatch {
            expected: model.n_features(),
            found: width,
        });
    }
    if let Some(tree) = model.trees.iter().position(|t| !check_covers(t)) {
        return Err(ExplainError::ZeroCover { tree });
    }
    Ok(())
}

/// Cover-weighted mean leaf value of one tree.
pub fn expected_value<T: Scalar>(node: &TreeNode<T>) -> T {
    match node {
        TreeNode::Leaf { leaf, .. } => *leaf,
        TreeNode::Split { cover, left, right, .. } => {
            (left.cover() * expected_value(left) + right.cover() * expected_value(right)) / *cover
        }
    }
}

pub(crate) fn base_value<T: Scalar>(model: &GradientBoostedEnsemble<T>) -> T {
    model
        .trees
        .iter()
        .fold(model.base_margin, |acc, t| acc + expected_value(t))
}

/// Path-dependent TreeSHAP attribution of one row, summed over trees.
pub fn tree_shap<T: Scalar>(model: &GradientBoostedEnsemble<T>, row: &[T]) -> Result<ShapRow<T>> {
    validate(model, row.len())?;
    Ok(shap_row_unchecked(model, row, base_value(model)))
}

fn shap_row_unchecked<T: Scalar>(model: &GradientBoostedEnsemble<T>, row: &[T], base: T) -> ShapRow<T> {
    let mut phi = vec![T::zero(); row.len()];
    let mut buf = Vec::new();
    for tree in &model.trees {
        let depth = tree.depth() + 2;
        buf.clear();
        buf.resize(
            depth * (depth + 1) / 2,
            PathElem { feature: ROOT, zero: T::zero(), one: T::zero(), weight: T::zero() },
        );
        recurse(tree, row, &mut phi, &mut buf, 0, T::one(), T::one(), ROOT);
    }
    ShapRow {
        phi,
        base_value: base,
        margin: model.margin_unchecked(row),
    }
}

/// Rowwise [`tree_shap`] over a dataset.
pub fn shap_matrix<T: Scalar>(model: &GradientBoostedEnsemble<T>, ds: &Dataset<T>) -> Result<ShapMatrix<T>> {
    validate(model, ds.n_features())?;
    let base = base_value(model);
    let rows = (0..ds.n_rows())
        .into_par_iter()
        .map(|i| shap_row_unchecked(model, ds.row(i), base))
        .collect();
    Ok(ShapMatrix {
        feature_names: model.schema.names().to_vec(),
        base_value: base,
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Scalar>(
    node: &TreeNode<T>,
    x: &[T],
    phi: &mut [T],
    path: &mut [PathElem<T>],
    depth: usize,
    parent_zero: T,
    parent_one: T,
    parent_feature: usize,
) {
    extend(path, depth, parent_zero, parent_one, parent_feature);
    let mut depth = depth;
    match node {
        TreeNode::Leaf { leaf, .. } => {
            for i in 1..=depth {
                let w = unwound_sum(path, depth, i);
                let el = path[i];
                phi[el.feature] += w * (el.one - el.zero) * *leaf;
            }
        }
        TreeNode::Split { feature, threshold, cover, left, right } => {
            let (hot, cold) = if x[*feature] <= *threshold {
                (left, right)
            } else {
                (right, left)
            };
            let hot_zero = hot.cover() / *cover;
            let cold_zero = cold.cover() / *cover;
            let mut incoming_zero = T::one();
            let mut incoming_one = T::one();
            if let Some(k) = (1..=depth).find(|&k| path[k].feature == *feature) {
                incoming_zero = path[k].zero;
                incoming_one = path[k].one;
                unwind(path, depth, k);
                depth -= 1;
            }
            let (parent, child) = path.split_at_mut(depth + 1);
            child[..parent.len()].copy_from_slice(parent);
            recurse(hot, x, phi, child, depth + 1, hot_zero * incoming_zero, incoming_one, *feature);
            child[..parent.len()].copy_from_slice(parent);
            recurse(cold, x, phi, child, depth + 1, cold_zero * incoming_zero, T::zero(), *feature);
        }
    }
}

fn extend<T: Scalar>(path: &mut [PathElem<T>], depth: usize, zero: T, one: T, feature: usize) {
    path[depth] = PathElem {
        feature,
        zero,
        one,
        weight: if depth == 0 { T::one() } else { T::zero() },
    };
    let denom = T::from_usize_lossy(depth + 1);
    for i in (0..depth).rev() {
        let w = path[i].weight;
        path[i + 1].weight += one * w * T::from_usize_lossy(i + 1) / denom;
        path[i].weight = zero * w * T::from_usize_lossy(depth - i) / denom;
    }
}

fn unwind<T: Scalar>(path: &mut [PathElem<T>], depth: usize, index: usize) {
    let one = path[index].one;
    let zero = path[index].zero;
    let denom = T::from_usize_lossy(depth + 1);
    let mut next = path[depth].weight;
    for i in (0..depth).rev() {
        if one != T::zero() {
            let tmp = path[i].weight;
            path[i].weight = next * denom / (T::from_usize_lossy(i + 1) * one);
            next = tmp - path[i].weight * zero * T::from_usize_lossy(depth - i) / denom;
        } else {
            path[i].weight = path[i].weight * denom / (zero * T::from_usize_lossy(depth - i));
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
}

fn unwound_sum<T: Scalar>(path: &[PathElem<T>], depth: usize, index: usize) -> T {
    let one = path[index].one;
    let zero = path[index].zero;
    let denom = T::from_usize_lossy(depth + 1);
    let mut next = path[depth].weight;
    let mut total = T::zero();
    for i in (0..depth).rev() {
        if one != T::zero() {
            let tmp = next * denom / (T::from_usize_lossy(i + 1) * one);
            total += tmp;
            next = path[i].weight - tmp * zero * T::from_usize_lossy(depth - i) / denom;
        } else {
            total += path[i].weight / zero / (T::from_usize_lossy(depth - i) / denom);
        }
    }
    total
}
