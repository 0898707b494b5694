//! Class rebalancing: ADASYN oversampling of the rare (label 1) class,
//! NEARMISS undersampling of the common (label 0) class, and two-sample
//! Kolmogorov-Smirnov audits of both steps.

mod adasyn;
mod hybrid;
mod knn;
mod ks;
mod nearmiss;

use thiserror::Error;

pub use adasyn::{adasyn, adasyn_with_scaler, AdasynConfig, AdasynOutcome, SyntheticDraw};
pub use hybrid::{hybrid_balance, AuditEntry, AuditStep, BalanceAudit, HybridConfig, NearmissSettings};
pub use knn::k_nearest;
pub use ks::{kolmogorov_survival, ks_two_sample, KsResult};
pub use nearmiss::{nearmiss, nearmiss_with_scaler, NearmissConfig, NearmissOutcome, NearmissVariant};

use crate::data::DataError;

#[derive(Debug, Error)]
pub enum ResampleError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("ADASYN needs at least 2 minority rows, found {0}")]
    TooFewMinority(usize),
    #[error("NEARMISS target {target} outside [1, {majority}]")]
    BadTarget { target: usize, majority: usize },
    #[error("invalid resampling config: {0}")]
    Config(String),
    #[error("KS test needs nonempty samples")]
    EmptySample,
    #[error("KS test sample contains a non-finite value")]
    NonFiniteSample,
}

pub type Result<T, E = ResampleError> = std::result::Result<T, E>;
