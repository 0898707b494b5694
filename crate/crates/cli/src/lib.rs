//! Pipeline stages behind the `propensity` command.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod pipeline;

pub use config::PipelineConfig;
pub use error::CliError;
pub use pipeline::{Pipeline, Stage};
