//! Bayesian optimization of boosting hyperparameters against cross-validated
//! PR-AUC: Gaussian-process surrogate with a Matérn-5/2 kernel and Expected
//! Improvement scored over quasi-random candidates.

mod bayes;
mod gp;
mod space;
mod tune;

use thiserror::Error;

pub use bayes::{expected_improvement, latin_hypercube, optimize, suggest_unit, BayesConfig, Observation};
pub use gp::GaussianProcess;
pub use space::{SearchSpace, DIM};
pub use tune::{suggest, tune, Strategy, TrialRecord, TrialStatus, TuneConfig, TuneResult};

use crate::eval::EvalError;

#[derive(Debug, Error)]
pub enum HpoError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("trial budget must be at least 1")]
    Budget,
    #[error("invalid search space: {0}")]
    Space(String),
}

pub type Result<T, E = HpoError> = std::result::Result<T, E>;
