//! Attribution of ensemble margins to features (path-dependent TreeSHAP),
//! global importance, and a shallow CART surrogate fit on SHAP values.

mod cart;
mod importance;
mod oracle;
mod rules;
mod treeshap;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cart::{fit_shap_cart, CartConfig, CartNode, ExplanationTree};
pub use importance::{importance_ranking, ImportanceEntry, RankedImportance};
pub use oracle::{exact_shapley_oracle, MAX_ORACLE_FEATURES};
pub use rules::{extract_rules, Condition, Rule};
pub use treeshap::{expected_value, shap_matrix, tree_shap};

use crate::data::DataError;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("tree {tree} has a node with non-positive cover")]
    ZeroCover { tree: usize },
    #[error("row width {found} does not match the model's {expected} features")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("exact Shapley enumeration supports at most {max} features, got {found}")]
    TooManyFeatures { found: usize, max: usize },
    #[error("{what}: expected {expected} rows, got {found}")]
    RowMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("surrogate needs both classes among the labels")]
    SingleClass,
    #[error("empty SHAP matrix")]
    Empty,
}

pub type Result<T, E = ExplainError> = std::result::Result<T, E>;

/// Per-feature attributions of one row on the margin scale:
/// `base_value + sum(phi) = margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ShapRow<T> {
    pub phi: Vec<T>,
    pub base_value: T,
    pub margin: T,
}

impl<T: Scalar> ShapRow<T> {
    pub fn reconstructed_margin(&self) -> T {
        self.base_value + self.phi.iter().copied().sum::<T>()
    }

    pub fn additivity_residual(&self) -> T {
        (self.reconstructed_margin() - self.margin).abs()
    }
}

/// SHAP rows for a whole dataset, sharing one base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ShapMatrix<T> {
    pub feature_names: Vec<String>,
    pub base_value: T,
    pub rows: Vec<ShapRow<T>>,
}

impl<T: Scalar> ShapMatrix<T> {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn max_additivity_residual(&self) -> T {
        self.rows
            .iter()
            .map(ShapRow::additivity_residual)
            .fold(T::zero(), T::max)
    }

    /// One column per feature, then `base_value` and `margin`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let mut header = self.feature_names.join(",");
        header.push_str(",base_value,margin");
        writeln!(w, "{header}")?;
        let mut line = String::new();
        for r in &self.rows {
            use std::fmt::Write as _;
            line.clear();
            for v in &r.phi {
                let _ = write!(line, "{v},");
            }
            let _ = write!(line, "{},{}", r.base_value, r.margin);
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
