use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::knn::{k_nearest, mean_extreme_distance};
use super::{ResampleError, Result};
use crate::data::{ClassCounts, Dataset, ScalerParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NearmissVariant {
    /// Smallest mean distance to the k nearest minority rows.
    #[default]
    #[serde(rename = "nearmiss1")]
    NearMiss1,
    /// Smallest mean distance to the k farthest minority rows.
    #[serde(rename = "nearmiss2")]
    NearMiss2,
    /// Candidates are the k nearest majority rows of each minority row;
    /// among them, smallest mean distance to the k nearest minority rows.
    #[serde(rename = "nearmiss3")]
    NearMiss3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NearmissConfig {
    #[serde(default)]
    pub variant: NearmissVariant,
    #[serde(default = "default_k")]
    pub k_neighbors: usize,
    pub target_count: usize,
}

fn default_k() -> usize {
    3
}

impl NearmissConfig {
    pub fn new(target_count: usize) -> Self {
        Self {
            variant: NearmissVariant::NearMiss1,
            k_neighbors: default_k(),
            target_count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NearmissOutcome<T> {
    /// Input rows in input order, restricted to minority rows and retained majority rows.
    pub dataset: Dataset<T>,
    pub counts_before: ClassCounts,
    pub counts_after: ClassCounts,
    /// Input indices of the retained majority rows, ascending.
    pub retained: Vec<usize>,
}

pub fn nearmiss<T: Scalar>(ds: &Dataset<T>, cfg: &NearmissConfig) -> Result<NearmissOutcome<T>> {
    nearmiss_with_scaler(ds, cfg, &ScalerParams::fit(ds))
}

pub fn nearmiss_with_scaler<T: Scalar>(
    ds: &Dataset<T>,
    cfg: &NearmissConfig,
    scaler: &ScalerParams<T>,
) -> Result<NearmissOutcome<T>> {
    let counts = ds.require_both_classes()?;
    if cfg.target_count == 0 || cfg.target_count > counts.negatives {
        return Err(ResampleError::BadTarget {
            target: cfg.target_count,
            majority: counts.negatives,
        });
    }
    if cfg.k_neighbors == 0 {
        return Err(ResampleError::Config("NEARMISS k_neighbors must be >= 1".into()));
    }
    let labels = ds.labels();
    let majority: Vec<usize> = (0..ds.n_rows()).filter(|&i| labels[i] == 0).collect();
    if cfg.target_count == majority.len() {
        return Ok(NearmissOutcome {
            dataset: ds.clone(),
            counts_before: counts,
            counts_after: counts,
            retained: majority,
        });
    }
    let minority: Vec<usize> = (0..ds.n_rows()).filter(|&i| labels[i] == 1).collect();
    let mut k = cfg.k_neighbors;
    if k > minority.len() {
        log::warn!(
            "NEARMISS k_neighbors {k} exceeds minority count {}; clamping",
            minority.len()
        );
        k = minority.len();
    }

    let z = scaler.transform_matrix(ds.features());
    let score = |i: usize, farthest: bool| mean_extreme_distance(&z, z.row(i), &minority, k, farthest);

    // (tier, score, index): NearMiss-3 ranks its candidates ahead of the
    // remaining rows, which only fill a shortfall.
    let mut ranked: Vec<(u8, T, usize)> = match cfg.variant {
        NearmissVariant::NearMiss1 => majority.par_iter().map(|&i| (0, score(i, false), i)).collect(),
        NearmissVariant::NearMiss2 => majority.par_iter().map(|&i| (0, score(i, true), i)).collect(),
        NearmissVariant::NearMiss3 => {
            let pools: Vec<Vec<usize>> = minority
                .par_iter()
                .map(|&m| k_nearest(&z, z.row(m), &majority, k, None))
                .collect();
            let candidates: BTreeSet<usize> = pools.into_iter().flatten().collect();
            majority
                .par_iter()
                .map(|&i| (u8::from(!candidates.contains(&i)), score(i, false), i))
                .collect()
        }
    };
    ranked.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.2.cmp(&b.2))
    });
    let mut retained: Vec<usize> = ranked[..cfg.target_count].iter().map(|r| r.2).collect();
    retained.sort_unstable();

    let mut keep = vec![false; ds.n_rows()];
    for &i in minority.iter().chain(&retained) {
        keep[i] = true;
    }
    let rows: Vec<usize> = (0..ds.n_rows()).filter(|&i| keep[i]).collect();
    let dataset = ds.subset(&rows);
    let counts_after = dataset.class_counts();
    Ok(NearmissOutcome {
        dataset,
        counts_before: counts,
        counts_after,
        retained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSchema, Matrix};

    fn planar(points: &[(f64, f64, u8)]) -> Dataset<f64> {
        let rows: Vec<Vec<f64>> = points.iter().map(|p| vec![p.0, p.1]).collect();
        let labels = points.iter().map(|p| p.2).collect();
        Dataset::new(FeatureSchema::continuous(2), Matrix::from_rows(&rows, 2), labels).unwrap()
    }

    #[test]
    fn nearmiss1_keeps_closest_majority_point() {
        // Raw distances to (0,1): 1.0, 6.40, 13.45. Standardization rescales
        // both axes by the same factor here, so the order is preserved.
        let ds = planar(&[(0.0, 0.0, 0), (5.0, 5.0, 0), (10.0, 10.0, 0), (0.0, 1.0, 1)]);
        let cfg = NearmissConfig { k_neighbors: 1, ..NearmissConfig::new(1) };
        let out = nearmiss(&ds, &cfg).unwrap();
        assert_eq!(out.retained, vec![0]);
        assert_eq!(out.dataset.row(0), &[0.0, 0.0]);
        assert_eq!(out.counts_after, ClassCounts { negatives: 1, positives: 1 });
    }

    #[test]
    fn full_target_is_identity() {
        let ds = planar(&[(0.0, 0.0, 0), (5.0, 5.0, 0), (0.0, 1.0, 1)]);
        let out = nearmiss(&ds, &NearmissConfig::new(2)).unwrap();
        assert_eq!(out.dataset, ds);
    }

    #[test]
    fn variants_differ_as_expected() {
        // Minority at x=0 and x=10; majority spread along the line.
        let ds = planar(&[
            (0.0, 0.0, 1),
            (10.0, 0.0, 1),
            (1.0, 0.0, 0),
            (5.0, 0.0, 0),
            (20.0, 0.0, 0),
            (-8.0, 0.0, 0),
        ]);
        let pick = |variant, k| {
            let cfg = NearmissConfig { variant, k_neighbors: k, target_count: 1 };
            nearmiss(&ds, &cfg).unwrap().retained
        };
        assert_eq!(pick(NearmissVariant::NearMiss1, 1), vec![2]);
        // Farthest minority: 1->9, 5->5, 20->20, -8->18.
        assert_eq!(pick(NearmissVariant::NearMiss2, 1), vec![3]);
        assert_eq!(pick(NearmissVariant::NearMiss3, 1), vec![2]);
    }

    #[test]
    fn clamps_k_and_rejects_bad_target() {
        let ds = planar(&[(0.0, 0.0, 0), (5.0, 5.0, 0), (0.0, 1.0, 1)]);
        let cfg = NearmissConfig { k_neighbors: 10, ..NearmissConfig::new(1) };
        assert_eq!(nearmiss(&ds, &cfg).unwrap().retained, vec![0]);
        assert!(matches!(
            nearmiss(&ds, &NearmissConfig::new(3)),
            Err(ResampleError::BadTarget { .. })
        ));
        assert!(nearmiss(&ds, &NearmissConfig::new(0)).is_err());
    }
}
