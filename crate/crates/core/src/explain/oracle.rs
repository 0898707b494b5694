use super::{ExplainError, Result, ShapRow};
use crate::gbt::{GradientBoostedEnsemble, TreeNode};
use crate::scalar::Scalar;

pub const MAX_ORACLE_FEATURES: usize = 12;

/// Conditional expectation of one tree given that features in `mask` are
/// known: known splits follow `x`, unknown splits average by cover.
fn conditional<T: Scalar>(node: &TreeNode<T>, x: &[T], mask: u32) -> T {
    match node {
        TreeNode::Leaf { leaf, .. } => *leaf,
        TreeNode::Split { feature, threshold, cover, left, right } => {
            if mask & (1 << feature) != 0 {
                if x[*feature] <= *threshold {
                    conditional(left, x, mask)
                } else {
                    conditional(right, x, mask)
                }
            } else {
                (left.cover() * conditional(left, x, mask)
                    + right.cover() * conditional(right, x, mask))
                    / *cover
            }
        }
    }
}

/// Shapley values by enumerating every feature subset. Exponential in the
/// number of features; intended as a reference for small models.
pub fn exact_shapley_oracle<T: Scalar>(model: &GradientBoostedEnsemble<T>, x: &[T]) -> Result<ShapRow<T>> {
    let d = model.n_features();
    if x.len() != d {
        return Err(ExplainError::SchemaMismatch { expected: d, found: x.len() });
    }
    if d > MAX_ORACLE_FEATURES {
        return Err(ExplainError::TooManyFeatures { found: d, max: MAX_ORACLE_FEATURES });
    }
    let n_sets = 1usize << d;
    let value: Vec<T> = (0..n_sets)
        .map(|mask| {
            model
                .trees
                .iter()
                .fold(model.base_margin, |acc, t| acc + conditional(t, x, mask as u32))
        })
        .collect();

    let mut fact = vec![T::one(); d + 1];
    for i in 1..=d {
        fact[i] = fact[i - 1] * T::from_usize_lossy(i);
    }
    let mut phi = vec![T::zero(); d];
    for (j, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << j;
        for mask in 0..n_sets {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let w = fact[s] * fact[d - s - 1] / fact[d];
            *p += w * (value[mask | bit] - value[mask]);
        }
    }
    Ok(ShapRow {
        phi,
        base_value: value[0],
        margin: value[n_sets - 1],
    })
}
