use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{grad_hess_logistic, mean_logistic_loss};
use super::tree::{build_tree, sorted_orders, TreeNode};
use super::{BoostParams, GbtError, Result};
use crate::data::{Dataset, FeatureSchema, Matrix};
use crate::scalar::{sigmoid, Scalar};

/// Boosted ensemble: `margin = base_margin + sum of tree outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GradientBoostedEnsemble<T> {
    pub base_margin: T,
    pub params: BoostParams,
    pub schema: FeatureSchema,
    /// Unused by the deterministic trainer; kept for provenance.
    pub seed: u64,
    pub trees: Vec<TreeNode<T>>,
}

pub fn train<T: Scalar>(
    ds: &Dataset<T>,
    params: &BoostParams,
    seed: u64,
) -> Result<GradientBoostedEnsemble<T>> {
    fit(ds, params, seed, false).map(|(m, _)| m)
}

/// Like [`train`], also returning the mean training loss before the first
/// round and after every round.
pub fn train_traced<T: Scalar>(
    ds: &Dataset<T>,
    params: &BoostParams,
    seed: u64,
) -> Result<(GradientBoostedEnsemble<T>, Vec<T>)> {
    fit(ds, params, seed, true)
}

fn fit<T: Scalar>(
    ds: &Dataset<T>,
    params: &BoostParams,
    seed: u64,
    traced: bool,
) -> Result<(GradientBoostedEnsemble<T>, Vec<T>)> {
    params.validate()?;
    let counts = ds.require_both_classes()?;
    let p = T::from_usize_lossy(counts.positives) / T::from_usize_lossy(counts.total());
    let base_margin = (p / (T::one() - p)).ln();

    let x = ds.features();
    let labels = ds.labels();
    let orders = sorted_orders(x);
    let mut margins = vec![base_margin; ds.n_rows()];
    let mut trace = Vec::new();
    if traced {
        trace.push(mean_logistic_loss(labels, &margins));
    }
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        let (g, h) = grad_hess_logistic(labels, &margins);
        let (tree, values) = build_tree(x, &orders, &g, &h, params)?;
        for (m, v) in margins.iter_mut().zip(values) {
            *m += v;
        }
        trees.push(tree);
        if traced {
            trace.push(mean_logistic_loss(labels, &margins));
        }
    }
    Ok((
        GradientBoostedEnsemble {
            base_margin,
            params: params.clone(),
            schema: ds.schema().clone(),
            seed,
            trees,
        },
        trace,
    ))
}

impl<T: Scalar> GradientBoostedEnsemble<T> {
    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    fn check_width(&self, width: usize) -> Result<()> {
        if width != self.n_features() {
            return Err(GbtError::SchemaMismatch {
                expected: self.n_features(),
                found: width,
            });
        }
        Ok(())
    }

    pub fn margin_row(&self, row: &[T]) -> Result<T> {
        self.check_width(row.len())?;
        Ok(self.margin_unchecked(row))
    }

    #[inline]
    pub(crate) fn margin_unchecked(&self, row: &[T]) -> T {
        let mut m = self.base_margin;
        for t in &self.trees {
            m += t.predict(row);
        }
        m
    }

    pub fn predict_margin(&self, rows: &Matrix<T>) -> Result<Vec<T>> {
        self.check_width(rows.n_cols())?;
        Ok((0..rows.n_rows())
            .into_par_iter()
            .map(|i| self.margin_unchecked(rows.row(i)))
            .collect())
    }

    pub fn predict_proba(&self, rows: &Matrix<T>) -> Result<Vec<T>> {
        Ok(self.predict_margin(rows)?.into_iter().map(sigmoid).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ensemble serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
