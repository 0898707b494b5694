//! Datasets, CSV interchange, standardization, fold planning and the
//! synthetic customer-base generator.

mod csv_io;
mod folds;
mod scaler;
mod synthetic;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use csv_io::{load_csv, load_schema_sidecar, read_csv, write_csv, write_csv_to, SchemaSource};
pub use folds::{stratified_kfold, stratified_kfold_labels, FoldPlan};
pub use scaler::{standardize, ScalerParams};
pub use synthetic::{generate_synthetic, FeatureSpec, GeneratorConfig, Marginal};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("non-numeric value {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("label {value:?} at row {row} is not 0 or 1")]
    BadLabel { row: usize, value: String },
    #[error("duplicate column name {0:?}")]
    DuplicateName(String),
    #[error("last column must be named `label`, found {0:?}")]
    MissingLabel(String),
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: String },
    #[error("binary column {column} holds {value} at row {row}")]
    NotBinary { row: usize, column: String, value: f64 },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("invalid generator config: {0}")]
    Generator(String),
    #[error("invalid fold request: {0}")]
    Folds(String),
    #[error("dataset has {positives} positive and {negatives} negative rows; both classes are required")]
    SingleClass { positives: usize, negatives: usize },
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Count,
    Binary,
}

/// Ordered feature names with their kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct FeatureSchema {
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
}

impl TryFrom<RawSchema> for FeatureSchema {
    type Error = DataError;
    fn try_from(raw: RawSchema) -> Result<Self> {
        FeatureSchema::new(raw.names, raw.kinds)
    }
}

impl From<FeatureSchema> for RawSchema {
    fn from(s: FeatureSchema) -> Self {
        RawSchema {
            names: s.names,
            kinds: s.kinds,
        }
    }
}

impl FeatureSchema {
    pub fn new(names: Vec<String>, kinds: Vec<FeatureKind>) -> Result<Self> {
        if names.len() != kinds.len() {
            return Err(DataError::Schema(format!(
                "{} names but {} kinds",
                names.len(),
                kinds.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(DataError::Schema("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateName(name.clone()));
            }
        }
        Ok(Self { names, kinds })
    }

    /// All-continuous schema named `x0, x1, ...`.
    pub fn continuous(d: usize) -> Self {
        Self {
            names: (0..d).map(|j| format!("x{j}")).collect(),
            kinds: vec![FeatureKind::Continuous; d],
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn kind(&self, j: usize) -> FeatureKind {
        self.kinds[j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    data: Vec<T>,
    n_rows: usize,
    n_cols: usize,
}

impl<T: Copy> Matrix<T> {
    pub fn from_row_major(data: Vec<T>, n_rows: usize, n_cols: usize) -> Self {
        assert_eq!(data.len(), n_rows * n_cols, "matrix shape mismatch");
        Self {
            data,
            n_rows,
            n_cols,
        }
    }

    pub fn from_rows(rows: &[Vec<T>], n_cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self::from_row_major(data, rows.len(), n_cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.n_cols.max(1)).take(self.n_rows)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn push_row(&mut self, row: &[T]) {
        assert_eq!(row.len(), self.n_cols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.n_rows += 1;
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::from_row_major(data, indices.len(), self.n_cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub negatives: usize,
    pub positives: usize,
}

impl ClassCounts {
    pub fn from_labels(labels: &[u8]) -> Self {
        let positives = labels.iter().filter(|&&y| y == 1).count();
        Self {
            negatives: labels.len() - positives,
            positives,
        }
    }

    pub fn total(&self) -> usize {
        self.negatives + self.positives
    }
}

/// Feature matrix, binary labels (1 = shared data) and schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    schema: FeatureSchema,
    features: Matrix<T>,
    labels: Vec<u8>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(schema: FeatureSchema, features: Matrix<T>, labels: Vec<u8>) -> Result<Self> {
        if features.n_cols() != schema.len() {
            return Err(DataError::Schema(format!(
                "schema has {} features, matrix has {} columns",
                schema.len(),
                features.n_cols()
            )));
        }
        if labels.len() != features.n_rows() {
            return Err(DataError::Schema(format!(
                "{} labels for {} rows",
                labels.len(),
                features.n_rows()
            )));
        }
        for (i, &y) in labels.iter().enumerate() {
            if y > 1 {
                return Err(DataError::BadLabel {
                    row: i + 1,
                    value: y.to_string(),
                });
            }
        }
        for i in 0..features.n_rows() {
            for (j, &v) in features.row(i).iter().enumerate() {
                if !v.is_finite() {
                    return Err(DataError::NonFinite {
                        row: i + 1,
                        column: schema.name(j).to_owned(),
                    });
                }
                if schema.kind(j) == FeatureKind::Binary && v != T::zero() && v != T::one() {
                    return Err(DataError::NotBinary {
                        row: i + 1,
                        column: schema.name(j).to_owned(),
                        value: v.as_f64(),
                    });
                }
            }
        }
        Ok(Self {
            schema,
            features,
            labels,
        })
    }

    /// Skips validation; callers guarantee the invariants hold.
    pub(crate) fn from_parts_unchecked(
        schema: FeatureSchema,
        features: Matrix<T>,
        labels: Vec<u8>,
    ) -> Self {
        debug_assert_eq!(features.n_rows(), labels.len());
        debug_assert_eq!(features.n_cols(), schema.len());
        Self {
            schema,
            features,
            labels,
        }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.features.row(i)
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.features.column(j)
    }

    pub fn class_counts(&self) -> ClassCounts {
        ClassCounts::from_labels(&self.labels)
    }

    pub fn require_both_classes(&self) -> Result<ClassCounts> {
        let c = self.class_counts();
        if c.positives == 0 || c.negatives == 0 {
            return Err(DataError::SingleClass {
                positives: c.positives,
                negatives: c.negatives,
            });
        }
        Ok(c)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Values of column `j` restricted to rows with label `class`.
    pub fn class_column(&self, j: usize, class: u8) -> Vec<T> {
        (0..self.n_rows())
            .filter(|&i| self.labels[i] == class)
            .map(|i| self.features.get(i, j))
            .collect()
    }
}
