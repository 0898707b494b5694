use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion, metrics_from_confusion, pr_auc, ConfusionCounts};
use super::{EvalError, Result};
use crate::data::{stratified_kfold, Dataset, FoldPlan};
use crate::gbt::{train, BoostParams};
use crate::resample::{hybrid_balance, BalanceAudit, HybridConfig};
use crate::scalar::Scalar;
use crate::seed::{derive_indexed, derive_seed};

/// Rebalancing applied to each training portion; `None` trains on it as is.
pub type ResampleSpec<'a> = Option<&'a HybridConfig>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n_test: usize,
    pub positives: usize,
    pub pr_auc: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub confusion: ConfusionCounts,
}

/// Mean and sample standard deviation over the folds where a metric is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub folds: usize,
}

impl MeanStd {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let v: Vec<f64> = values.into_iter().flatten().collect();
        let n = v.len();
        if n == 0 {
            return Self { mean: None, std: None, folds: 0 };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| {
            let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        Self { mean: Some(mean), std, folds: n }
    }
}

impl fmt::Display for MeanStd {
    /// `0.91537 (0.00817)`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.mean, self.std) {
            (None, _) => write!(f, "undefined"),
            (Some(m), Some(s)) => write!(f, "{m:.5} ({s:.5})"),
            (Some(m), None) => write!(f, "{m:.5} (-)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub k: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Folds without positives; they count toward accuracy and specificity only.
    pub positive_free_folds: usize,
    pub pr_auc: MeanStd,
    pub recall: MeanStd,
    pub specificity: MeanStd,
    pub accuracy: MeanStd,
    pub folds: Vec<FoldMetrics>,
}

impl MetricsSummary {
    fn from_folds(k: usize, seed: u64, threshold: f64, folds: Vec<FoldMetrics>) -> Self {
        Self {
            k,
            seed,
            threshold,
            positive_free_folds: folds.iter().filter(|f| f.positives == 0).count(),
            pr_auc: MeanStd::of(folds.iter().map(|f| f.pr_auc)),
            recall: MeanStd::of(folds.iter().map(|f| f.recall)),
            specificity: MeanStd::of(folds.iter().map(|f| f.specificity)),
            accuracy: MeanStd::of(folds.iter().map(|f| f.accuracy)),
            folds,
        }
    }

    /// Fixed-width `metric  mean (std)` table.
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<13}{}\n", "metric", "mean (std)");
        for (name, m) in [
            ("PR-AUC", &self.pr_auc),
            ("Recall", &self.recall),
            ("Specificity", &self.specificity),
            ("Accuracy", &self.accuracy),
        ] {
            out.push_str(&format!("{name:<13}{m}\n"));
        }
        if self.positive_free_folds > 0 {
            out.push_str(&format!(
                "# {} of {} folds had no positives and are excluded from PR-AUC and recall\n",
                self.positive_free_folds, self.k
            ));
        }
        out
    }
}

struct PreparedFold<T> {
    train: Dataset<T>,
    test: Dataset<T>,
    audit: Option<BalanceAudit>,
}

/// Fold plan plus each fold's (rebalanced) training set and untouched test
/// set. Rebalancing does not depend on the boosting parameters, so one
/// preparation serves any number of evaluations.
pub struct PreparedFolds<T> {
    plan: FoldPlan,
    seed: u64,
    folds: Vec<PreparedFold<T>>,
}

impl<T: Scalar> PreparedFolds<T> {
    pub fn new(ds: &Dataset<T>, k: usize, seed: u64, resample: ResampleSpec<'_>) -> Result<Self> {
        let plan = stratified_kfold(ds, k, derive_seed(seed, "folds"))?;
        let folds = (0..k)
            .into_par_iter()
            .map(|f| {
                let train = ds.subset(&plan.train_indices(f));
                let test = ds.subset(&plan.test_indices(f));
                let (train, audit) = match resample {
                    Some(cfg) => {
                        let mut cfg = cfg.clone();
                        cfg.adasyn.seed = derive_indexed(seed, "adasyn", f as u64);
                        let (balanced, audit) = hybrid_balance(&train, &cfg)
                            .map_err(|e| EvalError::Fold { fold: f, source: Box::new(e.into()) })?;
                        (balanced, Some(audit))
                    }
                    None => (train, None),
                };
                Ok(PreparedFold { train, test, audit })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { plan, seed, folds })
    }

    pub fn plan(&self) -> &FoldPlan {
        &self.plan
    }

    pub fn k(&self) -> usize {
        self.plan.k
    }

    pub fn audits(&self) -> impl Iterator<Item = Option<&BalanceAudit>> {
        self.folds.iter().map(|f| f.audit.as_ref())
    }

    pub fn training_set(&self, fold: usize) -> &Dataset<T> {
        &self.folds[fold].train
    }

    /// Trains on every training portion and scores the matching test fold.
    pub fn evaluate(&self, params: &BoostParams, threshold: f64) -> Result<MetricsSummary> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(EvalError::Threshold(threshold));
        }
        let folds = self
            .folds
            .par_iter()
            .enumerate()
            .map(|(f, fold)| {
                score_fold(f, fold, params, threshold, derive_indexed(self.seed, "model", f as u64))
                    .map_err(|e| EvalError::Fold { fold: f, source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MetricsSummary::from_folds(self.plan.k, self.seed, threshold, folds))
    }
}

fn score_fold<T: Scalar>(
    f: usize,
    fold: &PreparedFold<T>,
    params: &BoostParams,
    threshold: f64,
    model_seed: u64,
) -> Result<FoldMetrics> {
    let model = train(&fold.train, params, model_seed)?;
    let scores = model.predict_proba(fold.test.features())?;
    let labels = fold.test.labels();
    let c = confusion(labels, &scores, threshold)?;
    let rates = metrics_from_confusion(&c);
    let positives = c.tp + c.fn_;
    let pr = if positives > 0 {
        Some(pr_auc(labels, &scores)?)
    } else {
        None
    };
    Ok(FoldMetrics {
        fold: f,
        n_test: labels.len(),
        positives,
        pr_auc: pr,
        recall: rates.recall,
        specificity: rates.specificity,
        accuracy: rates.accuracy,
        confusion: c,
    })
}

/// Stratified k-fold evaluation. Rebalancing, when requested, touches
/// training portions only; test folds keep the original class mix.
pub fn cross_validate<T: Scalar>(
    ds: &Dataset<T>,
    params: &BoostParams,
    k: usize,
    seed: u64,
    resample: ResampleSpec<'_>,
    threshold: f64,
) -> Result<MetricsSummary> {
    PreparedFolds::new(ds, k, seed, resample)?.evaluate(params, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_sample_convention() {
        let m = MeanStd::of([Some(1.0), None, Some(3.0)]);
        assert_eq!(m.mean, Some(2.0));
        assert_eq!(m.std, Some(2f64.sqrt()));
        assert_eq!(m.folds, 2);
        assert_eq!(MeanStd::of([None]).to_string(), "undefined");
    }

    #[test]
    fn table_formatting() {
        let m = MeanStd { mean: Some(0.91537), std: Some(0.00817), folds: 100 };
        assert_eq!(m.to_string(), "0.91537 (0.00817)");
        let s = MetricsSummary::from_folds(2, 0, 0.5, vec![]);
        let table = s.render_table();
        assert!(table.starts_with("metric       mean (std)\n"));
        assert!(table.contains("PR-AUC       undefined\n"));
    }
}
