use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::CliError;

pub const DATASET: &str = "dataset.csv";
pub const SCHEMA: &str = "schema.json";
pub const BALANCED: &str = "balanced.csv";
pub const BALANCE_AUDIT: &str = "balance_audit.json";
pub const TUNE_RESULT: &str = "tune_result.json";
pub const MODEL: &str = "model.json";
pub const METRICS: &str = "metrics.json";
pub const METRICS_TABLE: &str = "metrics.txt";
pub const SHAP: &str = "shap.csv";
pub const IMPORTANCE: &str = "importance.json";
pub const IMPORTANCE_TABLE: &str = "importance.txt";
pub const CART: &str = "cart.json";
pub const RULES: &str = "rules.txt";
pub const MANIFEST: &str = "manifest.json";

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(hex(&Sha256::digest(fs::read(path)?)))
}

fn io_err(path: &Path, e: std::io::Error, stage: &'static str) -> CliError {
    CliError::Stage {
        stage,
        message: format!("{}: {e}", path.display()),
    }
}

/// Writes `payload` as a JSON object with `config_digest` added.
pub fn write_json<S: Serialize>(path: &Path, digest: &str, payload: &S, stage: &'static str) -> Result<(), CliError> {
    let mut v = serde_json::to_value(payload).map_err(|e| CliError::Stage {
        stage,
        message: e.to_string(),
    })?;
    match &mut v {
        Value::Object(m) => {
            m.insert("config_digest".into(), Value::String(digest.into()));
        }
        other => {
            v = serde_json::json!({ "config_digest": digest, "value": other.take() });
        }
    }
    let mut text = serde_json::to_string_pretty(&v).expect("value serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e, stage))
}

/// Reads an artifact written by [`write_json`], checking it came from the same config.
pub fn read_json<D: DeserializeOwned>(path: &Path, digest: &str, stage: &'static str) -> Result<D, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Stage {
        stage,
        message: format!("missing input {}: {e}", path.display()),
    })?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| CliError::Stage {
        stage,
        message: format!("{}: {e}", path.display()),
    })?;
    let found = v
        .as_object_mut()
        .and_then(|m| m.remove("config_digest"))
        .and_then(|d| d.as_str().map(str::to_owned));
    if found.as_deref() != Some(digest) {
        return Err(CliError::Stage {
            stage,
            message: format!("{} was produced by a different config", path.display()),
        });
    }
    serde_json::from_value(v).map_err(|e| CliError::Stage {
        stage,
        message: format!("{}: {e}", path.display()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub wall_clock_s: f64,
}

/// File digests and timings for every stage run into one output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_digest: String,
    pub stages: BTreeMap<String, StageRecord>,
}

impl RunManifest {
    pub fn path(dir: &Path) -> PathBuf {
        dir.join(MANIFEST)
    }

    /// The existing manifest when it matches `digest`, otherwise a fresh one.
    pub fn open(dir: &Path, digest: &str) -> Self {
        fs::read_to_string(Self::path(dir))
            .ok()
            .and_then(|t| serde_json::from_str::<Self>(&t).ok())
            .filter(|m| m.config_digest == digest)
            .unwrap_or_else(|| Self {
                tool_version: env!("CARGO_PKG_VERSION").into(),
                config_digest: digest.into(),
                stages: BTreeMap::new(),
            })
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let path = Self::path(dir);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e, "manifest"))
    }

    /// Files whose current digest differs from the recorded output digest.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        let mut latest: BTreeMap<&str, &str> = BTreeMap::new();
        for rec in self.stages.values() {
            for (f, d) in &rec.outputs {
                latest.insert(f, d);
            }
        }
        latest
            .into_iter()
            .filter(|(f, d)| sha256_file(&dir.join(f)).ok().as_deref() != Some(*d))
            .map(|(f, _)| f.to_string())
            .collect()
    }
}

pub fn digests(dir: &Path, files: &[&str], stage: &'static str) -> Result<BTreeMap<String, String>, CliError> {
    files
        .iter()
        .map(|f| {
            let p = dir.join(f);
            sha256_file(&p)
                .map(|d| (f.to_string(), d))
                .map_err(|e| io_err(&p, e, stage))
        })
        .collect()
}
