use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, Result};
use crate::scalar::Scalar;
use crate::seed::rng_from;

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
    /// Folds whose test portion holds no positive row.
    pub positive_free: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn positive_counts(&self, labels: &[u8]) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for (&f, &y) in self.assignments.iter().zip(labels) {
            counts[f] += y as usize;
        }
        counts
    }

    pub fn is_positive_free(&self, fold: usize) -> bool {
        self.positive_free.binary_search(&fold).is_ok()
    }
}

pub fn stratified_kfold<T: Scalar>(ds: &Dataset<T>, k: usize, seed: u64) -> Result<FoldPlan> {
    stratified_kfold_labels(ds.labels(), k, seed)
}

/// Shuffles each class independently, then deals positives followed by
/// negatives round-robin, so fold sizes and per-fold positive counts each
/// differ by at most one.
pub fn stratified_kfold_labels(labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    let n = labels.len();
    if k < 2 {
        return Err(DataError::Folds(format!("k = {k}, need at least 2")));
    }
    if k > n {
        return Err(DataError::Folds(format!("k = {k} exceeds {n} rows")));
    }
    let mut pos: Vec<usize> = (0..n).filter(|&i| labels[i] == 1).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| labels[i] != 1).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(DataError::SingleClass {
            positives: pos.len(),
            negatives: neg.len(),
        });
    }
    let mut rng = rng_from(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut assignments = vec![0; n];
    for (slot, &i) in pos.iter().chain(neg.iter()).enumerate() {
        assignments[i] = slot % k;
    }
    let positive_free = (pos.len().min(k)..k).collect();
    Ok(FoldPlan {
        k,
        assignments,
        seed,
        positive_free,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_ten_into_five() {
        let labels = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
        let plan = stratified_kfold_labels(&labels, 5, 3).unwrap();
        assert_eq!(plan.fold_sizes(), vec![2; 5]);
        assert_eq!(plan.positive_counts(&labels), vec![1; 5]);
        assert!(plan.positive_free.is_empty());
        assert_eq!(plan, stratified_kfold_labels(&labels, 5, 3).unwrap());
    }

    #[test]
    fn sparse_positives_flag_empty_folds() {
        let mut labels = vec![0u8; 1000];
        for i in [17, 230, 511, 999] {
            labels[i] = 1;
        }
        let plan = stratified_kfold_labels(&labels, 100, 11).unwrap();
        // Enumerate assignments directly.
        let counts = plan.positive_counts(&labels);
        assert_eq!(counts.iter().filter(|&&c| c == 1).count(), 4);
        assert_eq!(counts.iter().filter(|&&c| c == 0).count(), 96);
        assert_eq!(plan.positive_free.len(), 96);
        for f in 0..100 {
            assert_eq!(plan.is_positive_free(f), counts[f] == 0);
        }
    }

    #[test]
    fn errors() {
        assert!(stratified_kfold_labels(&[1, 0], 3, 0).is_err());
        assert!(stratified_kfold_labels(&[1, 0], 1, 0).is_err());
        assert!(matches!(
            stratified_kfold_labels(&[0, 0, 0], 2, 0),
            Err(DataError::SingleClass { .. })
        ));
    }

    proptest! {
        #[test]
        fn partition_and_balance(labels in proptest::collection::vec(0u8..2, 4..300), k in 2usize..12, seed: u64) {
            let n_pos = labels.iter().filter(|&&y| y == 1).count();
            prop_assume!(n_pos > 0 && n_pos < labels.len() && k <= labels.len());
            let plan = stratified_kfold_labels(&labels, k, seed).unwrap();
            let sizes = plan.fold_sizes();
            prop_assert!(sizes.iter().all(|&s| s >= 1));
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let pc = plan.positive_counts(&labels);
            prop_assert!(pc.iter().max().unwrap() - pc.iter().min().unwrap() <= 1);
            let mut all: Vec<usize> = (0..k).flat_map(|f| plan.test_indices(f)).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        }
    }
}
