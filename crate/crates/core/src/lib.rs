//! Rare-event propensity modelling: hybrid ADASYN/NearMiss rebalancing with
//! distribution audits, gradient-boosted trees tuned by Bayesian
//! optimization, cross-validated PR-AUC evaluation, and TreeSHAP
//! explanations summarized by a CART surrogate.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

pub mod data;
pub mod eval;
pub mod explain;
pub mod gbt;
pub mod hpo;
pub mod resample;
pub mod scalar;
pub mod seed;

pub use scalar::Scalar;

pub type Dataset = data::Dataset<f64>;
pub type Matrix = data::Matrix<f64>;
pub type Ensemble = gbt::GradientBoostedEnsemble<f64>;
pub type Tree = gbt::TreeNode<f64>;
pub type ShapMatrix = explain::ShapMatrix<f64>;
pub type ShapRow = explain::ShapRow<f64>;

pub type Dataset32 = data::Dataset<f32>;
pub type Matrix32 = data::Matrix<f32>;
pub type Ensemble32 = gbt::GradientBoostedEnsemble<f32>;
pub type ShapMatrix32 = explain::ShapMatrix<f32>;
