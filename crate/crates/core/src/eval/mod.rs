//! Classification metrics and the stratified cross-validation protocol.

mod cv;
mod metrics;

use thiserror::Error;

pub use cv::{cross_validate, FoldMetrics, MeanStd, MetricsSummary, PreparedFolds, ResampleSpec};
pub use metrics::{confusion, metrics_from_confusion, pr_auc, ConfusionCounts, RateMetrics};

use crate::data::DataError;
use crate::gbt::GbtError;
use crate::resample::ResampleError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Gbt(#[from] GbtError),
    #[error(transparent)]
    Resample(#[from] ResampleError),
    #[error("{labels} labels but {scores} scores")]
    LengthMismatch { labels: usize, scores: usize },
    #[error("threshold {0} outside (0,1)")]
    Threshold(f64),
    #[error("PR-AUC needs at least one positive label")]
    NoPositives,
    #[error("score vector contains a non-finite value")]
    NonFiniteScore,
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<EvalError>,
    },
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;
