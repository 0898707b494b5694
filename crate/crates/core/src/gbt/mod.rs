//! Gradient-boosted regression trees under logistic loss with second-order
//! (Newton) leaf weights and exact greedy split search.

mod ensemble;
mod loss;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ensemble::{train, train_traced, GradientBoostedEnsemble};
pub use loss::{grad_hess_logistic, logistic_loss, mean_logistic_loss};
pub use tree::{fit_tree, TreeNode};

use crate::data::DataError;

#[derive(Debug, Error)]
pub enum GbtError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("cannot fit a tree on zero rows")]
    EmptyInput,
    #[error("row width {found} does not match the model's {expected} features")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("invalid boosting parameters: {0}")]
    Params(String),
    #[error("gradient/hessian length {found} does not match {expected} rows")]
    Misaligned { expected: usize, found: usize },
}

pub type Result<T, E = GbtError> = std::result::Result<T, E>;

/// Boosting hyperparameters. `n_trees`, `max_depth` and `learning_rate` are the
/// tree number, tree depth and adaptation rate; node splitting is controlled by
/// `min_split_gain` together with `min_child_hessian`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_split_gain: f64,
    pub l2_reg: f64,
    pub min_child_hessian: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 4,
            learning_rate: 0.1,
            min_split_gain: 0.0,
            l2_reg: 1.0,
            min_child_hessian: 1.0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GbtError::Params(m.to_owned()));
        if self.max_depth == 0 {
            return bad("max_depth must be >= 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0,1]");
        }
        for (name, v) in [
            ("min_split_gain", self.min_split_gain),
            ("l2_reg", self.l2_reg),
            ("min_child_hessian", self.min_child_hessian),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(GbtError::Params(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}
