use std::path::{Path, PathBuf};

use propensity_core::data::GeneratorConfig;
use propensity_core::explain::CartConfig;
use propensity_core::gbt::BoostParams;
use propensity_core::hpo::{BayesConfig, SearchSpace, Strategy};
use propensity_core::resample::{AdasynConfig, NearmissSettings};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    #[default]
    Outflow,
    Inflow,
}

/// Synthetic data settings. Unset fields keep the preset's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSettings {
    #[serde(default)]
    pub preset: Preset,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prevalence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
}

impl GeneratorSettings {
    pub fn build(&self, seed: u64) -> GeneratorConfig {
        let mut g = match self.preset {
            Preset::Outflow => GeneratorConfig::outflow(self.n, seed),
            Preset::Inflow => GeneratorConfig::inflow(self.n, seed),
        };
        if let Some(p) = self.prevalence {
            g.prevalence = p;
        }
        if let Some(s) = self.noise_std {
            g.noise_std = s;
        }
        if let Some(b) = self.intercept {
            g.intercept = b;
        }
        g
    }
}

/// Exactly one of `path` and `generator`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// JSON map of column name to feature kind; inferred when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResampleSettings {
    /// When false, folds and the final model train on the raw data.
    pub enabled: bool,
    /// ADASYN settings; `seed` is ignored in favour of the master seed.
    pub adasyn: AdasynConfig,
    pub nearmiss: NearmissSettings,
    pub alpha: f64,
}

impl Default for ResampleSettings {
    fn default() -> Self {
        let h = propensity_core::resample::HybridConfig::default();
        Self {
            enabled: true,
            adasyn: h.adasyn,
            nearmiss: h.nearmiss,
            alpha: h.alpha,
        }
    }
}

impl ResampleSettings {
    pub fn hybrid(&self, seed: u64) -> propensity_core::resample::HybridConfig {
        let mut adasyn = self.adasyn.clone();
        adasyn.seed = seed;
        propensity_core::resample::HybridConfig {
            adasyn,
            nearmiss: self.nearmiss.clone(),
            alpha: self.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSettings {
    pub budget: usize,
    pub cv_folds: usize,
    pub strategy: Strategy,
    pub space: SearchSpace,
    pub bayes: BayesConfig,
    /// Untuned boosting parameters (`l2_reg`, `min_child_hessian`).
    pub base: BoostParams,
}

impl Default for TuneSettings {
    fn default() -> Self {
        Self {
            budget: 32,
            cv_folds: 10,
            strategy: Strategy::Bayesian,
            space: SearchSpace::default(),
            bayes: BayesConfig::default(),
            base: BoostParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSettings {
    pub k: usize,
    pub threshold: f64,
}

impl Default for EvaluateSettings {
    fn default() -> Self {
        Self { k: 100, threshold: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplainOn {
    /// The rebalanced set the final model was trained on.
    Balanced,
    /// Every row of the original dataset.
    #[default]
    Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainSettings {
    pub on: ExplainOn,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub cv_folds: usize,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        let c = CartConfig::default();
        Self {
            on: ExplainOn::Dataset,
            max_depth: c.max_depth,
            min_leaf: c.min_leaf,
            cv_folds: c.cv_folds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub data: DataSettings,
    #[serde(default)]
    pub resample: ResampleSettings,
    #[serde(default)]
    pub tune: TuneSettings,
    #[serde(default)]
    pub evaluate: EvaluateSettings,
    #[serde(default)]
    pub explain: ExplainSettings,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.data.path, &mut cfg.data.schema].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        match (&self.data.path, &self.data.generator) {
            (Some(_), Some(_)) => return bad("data: set either `path` or `generator`, not both".into()),
            (None, None) => return bad("data: one of `path` or `generator` is required".into()),
            _ => {}
        }
        if self.data.generator.is_some() && self.data.schema.is_some() {
            return bad("data: `schema` applies only to `path`".into());
        }
        self.resample
            .hybrid(0)
            .validate()
            .or_else(|e| bad(e.to_string()))?;
        self.tune.space.validate().or_else(|e| bad(e.to_string()))?;
        self.tune.base.validate().or_else(|e| bad(e.to_string()))?;
        if self.tune.budget < 1 {
            return bad("tune.budget must be >= 1".into());
        }
        if self.tune.cv_folds < 2 || self.evaluate.k < 2 {
            return bad("fold counts must be >= 2".into());
        }
        if !(self.evaluate.threshold > 0.0 && self.evaluate.threshold < 1.0) {
            return bad(format!("evaluate.threshold {} outside (0,1)", self.evaluate.threshold));
        }
        if self.explain.cv_folds < 2 {
            return bad("explain.cv_folds must be >= 2".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex(&Sha256::digest(json))
    }

    pub fn cart(&self) -> CartConfig {
        CartConfig {
            max_depth: self.explain.max_depth,
            min_leaf: self.explain.min_leaf,
            cv_folds: self.explain.cv_folds,
            seed: propensity_core::seed::derive_seed(self.seed, "cart"),
        }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub const DEMO_CONFIG: &str = include_str!("../demo.toml");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_parses() {
        let c = PipelineConfig::from_toml(DEMO_CONFIG).unwrap();
        assert!(c.data.generator.is_some());
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{DEMO_CONFIG}\n[evaluate]\nkk = 3\n");
        assert!(PipelineConfig::from_toml(&text).is_err());
        let typo = DEMO_CONFIG.replace("[tune]", "[tune]\nbugdet = 4");
        assert!(matches!(PipelineConfig::from_toml(&typo), Err(CliError::Config(_))));
    }

    #[test]
    fn digest_ignores_out_dir() {
        let mut c = PipelineConfig::from_toml(DEMO_CONFIG).unwrap();
        let d = c.digest();
        c.out_dir = Some("elsewhere".into());
        assert_eq!(c.digest(), d);
        c.seed += 1;
        assert_ne!(c.digest(), d);
    }
}
