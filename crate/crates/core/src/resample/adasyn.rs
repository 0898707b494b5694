use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::knn::k_nearest;
use super::{ResampleError, Result};
use crate::data::{ClassCounts, Dataset, FeatureKind, ScalerParams};
use crate::scalar::Scalar;
use crate::seed::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdasynConfig {
    pub k_neighbors: usize,
    /// Fraction of the class gap `majority - minority` to synthesize.
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for AdasynConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            target_ratio: 1.0,
            seed: 0,
        }
    }
}

impl AdasynConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(ResampleError::Config("ADASYN k_neighbors must be >= 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(ResampleError::Config(format!(
                "ADASYN target_ratio {} outside (0,1]",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

/// One synthetic row: `x[seed_row] + lambda * (x[neighbor_row] - x[seed_row])`
/// before rounding of binary and count columns. Indices refer to the input dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDraw {
    pub seed_row: usize,
    pub neighbor_row: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct AdasynOutcome<T> {
    /// Input rows followed by the synthetic rows.
    pub dataset: Dataset<T>,
    pub counts_before: ClassCounts,
    pub counts_after: ClassCounts,
    /// Input indices of the minority rows, ascending.
    pub minority_rows: Vec<usize>,
    /// Majority fraction among each minority row's k nearest neighbors.
    pub difficulty: Vec<f64>,
    /// Synthetic rows generated from each minority row.
    pub allocation: Vec<usize>,
    pub draws: Vec<SyntheticDraw>,
}

/// ADASYN with distances measured on features standardized by a scaler fit to `ds`.
pub fn adasyn<T: Scalar>(ds: &Dataset<T>, cfg: &AdasynConfig) -> Result<AdasynOutcome<T>> {
    adasyn_with_scaler(ds, cfg, &ScalerParams::fit(ds))
}

pub fn adasyn_with_scaler<T: Scalar>(
    ds: &Dataset<T>,
    cfg: &AdasynConfig,
    scaler: &ScalerParams<T>,
) -> Result<AdasynOutcome<T>> {
    cfg.validate()?;
    let counts = ds.require_both_classes()?;
    if counts.positives < 2 {
        return Err(ResampleError::TooFewMinority(counts.positives));
    }
    let labels = ds.labels();
    let minority_rows: Vec<usize> = (0..ds.n_rows()).filter(|&i| labels[i] == 1).collect();
    let gap = counts.negatives.saturating_sub(counts.positives);
    let total = (gap as f64 * cfg.target_ratio).round() as usize;

    let unchanged = |difficulty, allocation| AdasynOutcome {
        dataset: ds.clone(),
        counts_before: counts,
        counts_after: counts,
        minority_rows: minority_rows.clone(),
        difficulty,
        allocation,
        draws: Vec::new(),
    };
    if total == 0 {
        let m = minority_rows.len();
        return Ok(unchanged(vec![0.0; m], vec![0; m]));
    }

    let z = scaler.transform_matrix(ds.features());
    let all: Vec<usize> = (0..ds.n_rows()).collect();
    let k_all = cfg.k_neighbors.min(ds.n_rows() - 1);
    let k_min = cfg.k_neighbors.min(minority_rows.len() - 1);

    let (difficulty, minority_nn): (Vec<f64>, Vec<Vec<usize>>) = minority_rows
        .par_iter()
        .map(|&i| {
            let nn = k_nearest(&z, z.row(i), &all, k_all, Some(i));
            let majority = nn.iter().filter(|&&j| labels[j] == 0).count();
            let own = k_nearest(&z, z.row(i), &minority_rows, k_min, Some(i));
            (majority as f64 / k_all as f64, own)
        })
        .unzip();

    let allocation = largest_remainder(&difficulty, total);

    let d = ds.n_features();
    let kinds = ds.schema().kinds();
    let mut rng = rng_from(cfg.seed);
    let mut out = ds.features().clone();
    let mut draws = Vec::with_capacity(total);
    let mut row = vec![T::zero(); d];
    for (slot, &seed_row) in minority_rows.iter().enumerate() {
        let neighbors = &minority_nn[slot];
        for _ in 0..allocation[slot] {
            let neighbor_row = neighbors[rng.random_range(0..neighbors.len())];
            let lambda: f64 = rng.random();
            let lam = T::lit(lambda);
            let (a, b) = (ds.row(seed_row), ds.row(neighbor_row));
            for j in 0..d {
                let v = a[j] + lam * (b[j] - a[j]);
                row[j] = match kinds[j] {
                    FeatureKind::Binary | FeatureKind::Count => v.round(),
                    FeatureKind::Continuous => v,
                };
            }
            out.push_row(&row);
            draws.push(SyntheticDraw {
                seed_row,
                neighbor_row,
                lambda,
            });
        }
    }
    let mut labels_out = labels.to_vec();
    labels_out.resize(out.n_rows(), 1);
    let dataset = Dataset::from_parts_unchecked(ds.schema().clone(), out, labels_out);
    let counts_after = dataset.class_counts();
    Ok(AdasynOutcome {
        dataset,
        counts_before: counts,
        counts_after,
        minority_rows,
        difficulty,
        allocation,
        draws,
    })
}

/// Splits `total` across `weights` proportionally; the remainder left by
/// flooring goes to the largest fractional parts (lower index on ties).
/// All-zero weights are treated as uniform.
pub(crate) fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let sum: f64 = weights.iter().sum();
    let shares: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w / sum * total as f64).collect()
    } else {
        vec![total as f64 / n as f64; n]
    };
    let mut alloc: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}
