use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind, Matrix};
use crate::scalar::Scalar;

/// Per-column affine map `x -> (x - mean) / std`.
///
/// Binary and constant columns carry `mean = 0, std = 1`, so the map leaves
/// them unchanged. Every `std` is strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScalerParams<T> {
    pub means: Vec<T>,
    pub stds: Vec<T>,
}

impl<T: Scalar> ScalerParams<T> {
    /// Fits on continuous and count columns using the sample (n - 1) standard deviation.
    pub fn fit(ds: &Dataset<T>) -> Self {
        let d = ds.n_features();
        let n = ds.n_rows();
        let mut means = vec![T::zero(); d];
        let mut stds = vec![T::one(); d];
        if n < 2 {
            return Self { means, stds };
        }
        let nf = T::from_usize_lossy(n);
        for j in 0..d {
            if ds.schema().kind(j) == FeatureKind::Binary {
                continue;
            }
            let col = ds.column(j);
            let mean = col.iter().copied().sum::<T>() / nf;
            let ss = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
            let sd = (ss / (nf - T::one())).sqrt();
            if sd > T::zero() && sd.is_finite() {
                means[j] = mean;
                stds[j] = sd;
            }
        }
        Self { means, stds }
    }

    #[inline]
    pub fn transform_value(&self, j: usize, v: T) -> T {
        (v - self.means[j]) / self.stds[j]
    }

    pub fn transform_row(&self, row: &[T], out: &mut [T]) {
        for (j, (o, &v)) in out.iter_mut().zip(row).enumerate() {
            *o = self.transform_value(j, v);
        }
    }

    pub fn transform_matrix(&self, m: &Matrix<T>) -> Matrix<T> {
        let mut data = Vec::with_capacity(m.n_rows() * m.n_cols());
        for row in m.rows() {
            data.extend(row.iter().enumerate().map(|(j, &v)| self.transform_value(j, v)));
        }
        Matrix::from_row_major(data, m.n_rows(), m.n_cols())
    }

    pub fn apply(&self, ds: &Dataset<T>) -> Dataset<T> {
        Dataset::from_parts_unchecked(
            ds.schema().clone(),
            self.transform_matrix(ds.features()),
            ds.labels().to_vec(),
        )
    }
}

/// Standardizes continuous and count columns; binary columns and labels pass through.
pub fn standardize<T: Scalar>(ds: &Dataset<T>) -> (Dataset<T>, ScalerParams<T>) {
    let params = ScalerParams::fit(ds);
    (params.apply(ds), params)
}
