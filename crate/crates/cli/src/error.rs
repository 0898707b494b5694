use propensity_core::data::DataError;
use propensity_core::eval::EvalError;
use propensity_core::explain::ExplainError;
use propensity_core::gbt::GbtError;
use propensity_core::hpo::HpoError;
use propensity_core::resample::ResampleError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("stage {stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<&'a str>,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Stage { .. } => 4,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        let (kind, stage, message) = match self {
            CliError::Config(m) => ("config", None, m.clone()),
            CliError::Data(m) => ("data", None, m.clone()),
            CliError::Stage { stage, message } => ("stage", Some(*stage), message.clone()),
        };
        let rec = ErrorRecord {
            kind,
            stage,
            message,
            exit_code: self.exit_code(),
        };
        serde_json::json!({ "error": rec }).to_string()
    }
}

/// Whether a core error is at bottom a data validation problem.
pub(crate) trait Classify: std::fmt::Display {
    fn is_data(&self) -> bool;

    fn at(&self, stage: &'static str) -> CliError {
        if self.is_data() {
            CliError::Data(self.to_string())
        } else {
            CliError::Stage {
                stage,
                message: self.to_string(),
            }
        }
    }
}

impl Classify for DataError {
    fn is_data(&self) -> bool {
        true
    }
}

impl Classify for ResampleError {
    fn is_data(&self) -> bool {
        matches!(self, ResampleError::Data(_))
    }
}

impl Classify for GbtError {
    fn is_data(&self) -> bool {
        matches!(self, GbtError::Data(_))
    }
}

impl Classify for EvalError {
    fn is_data(&self) -> bool {
        match self {
            EvalError::Data(_) => true,
            EvalError::Gbt(e) => e.is_data(),
            EvalError::Resample(e) => e.is_data(),
            _ => false,
        }
    }
}

impl Classify for HpoError {
    fn is_data(&self) -> bool {
        matches!(self, HpoError::Eval(e) if e.is_data())
    }
}

impl Classify for ExplainError {
    fn is_data(&self) -> bool {
        matches!(self, ExplainError::Data(_))
    }
}
