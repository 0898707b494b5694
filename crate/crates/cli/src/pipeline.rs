use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use propensity_core::data::{
    generate_synthetic, load_csv, load_schema_sidecar, write_csv, Dataset, FeatureKind, SchemaSource,
};
use propensity_core::eval::cross_validate;
use propensity_core::explain::{extract_rules, fit_shap_cart, importance_ranking, shap_matrix};
use propensity_core::gbt::{train, GradientBoostedEnsemble};
use propensity_core::hpo::{tune, TuneConfig, TuneResult};
use propensity_core::resample::{hybrid_balance, BalanceAudit};
use propensity_core::seed::derive_seed;
use serde::{Deserialize, Serialize};

use crate::artifacts::*;
use crate::config::{ExplainOn, PipelineConfig};
use crate::error::{CliError, Classify};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Generate,
    Balance,
    Tune,
    Train,
    Evaluate,
    Explain,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Generate,
        Stage::Balance,
        Stage::Tune,
        Stage::Train,
        Stage::Evaluate,
        Stage::Explain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Balance => "balance",
            Stage::Tune => "tune",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Explain => "explain",
        }
    }

    fn inputs(self, cfg: &PipelineConfig) -> Vec<&'static str> {
        match self {
            Stage::Generate => vec![],
            Stage::Balance | Stage::Tune => vec![DATASET, SCHEMA],
            Stage::Train => vec![BALANCED, SCHEMA, TUNE_RESULT],
            Stage::Evaluate => vec![DATASET, SCHEMA, TUNE_RESULT],
            Stage::Explain => match cfg.explain.on {
                ExplainOn::Balanced => vec![BALANCED, SCHEMA, MODEL],
                ExplainOn::Dataset => vec![DATASET, SCHEMA, MODEL],
            },
        }
    }

    fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Generate => &[DATASET, SCHEMA],
            Stage::Balance => &[BALANCED, BALANCE_AUDIT],
            Stage::Tune => &[TUNE_RESULT],
            Stage::Train => &[MODEL],
            Stage::Evaluate => &[METRICS, METRICS_TABLE],
            Stage::Explain => &[SHAP, IMPORTANCE, IMPORTANCE_TABLE, CART, RULES],
        }
    }
}

/// A config bound to an output directory.
pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub out: PathBuf,
    pub digest: String,
}

#[derive(Serialize, Deserialize)]
struct AuditArtifact {
    resampled: bool,
    audit: Option<BalanceAudit>,
}

#[derive(Serialize, Deserialize)]
struct ModelArtifact {
    #[serde(flatten)]
    model: GradientBoostedEnsemble<f64>,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, out: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&out)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
        let digest = cfg.digest();
        Ok(Self { cfg, out, digest })
    }

    fn path(&self, f: &str) -> PathBuf {
        self.out.join(f)
    }

    pub fn run_all(&self) -> Result<(), CliError> {
        Stage::ALL.iter().try_for_each(|&s| self.run(s))
    }

    /// Runs one stage from its on-disk inputs and records it in the manifest.
    pub fn run(&self, stage: Stage) -> Result<(), CliError> {
        let name = stage.name();
        let inputs = stage.inputs(&self.cfg);
        for f in &inputs {
            if !self.path(f).exists() {
                return Err(CliError::Stage {
                    stage: name,
                    message: format!("missing input {f}; run the earlier stages first"),
                });
            }
        }
        let input_digests = digests(&self.out, &inputs, name)?;
        let t = Instant::now();
        log::info!("stage {name}");
        match stage {
            Stage::Generate => self.generate(),
            Stage::Balance => self.balance(),
            Stage::Tune => self.tune(),
            Stage::Train => self.train(),
            Stage::Evaluate => self.evaluate(),
            Stage::Explain => self.explain(),
        }?;
        let wall_clock_s = t.elapsed().as_secs_f64();
        let mut manifest = RunManifest::open(&self.out, &self.digest);
        manifest.stages.insert(
            name.into(),
            StageRecord {
                inputs: input_digests,
                outputs: digests(&self.out, stage.outputs(), name)?,
                wall_clock_s,
            },
        );
        manifest.save(&self.out)
    }

    fn load(&self, file: &str, stage: &'static str) -> Result<Dataset<f64>, CliError> {
        let kinds = load_schema_sidecar(self.path(SCHEMA)).map_err(|e| e.at(stage))?;
        load_csv(self.path(file), SchemaSource::Sidecar(kinds)).map_err(|e| e.at(stage))
    }

    fn generate(&self) -> Result<(), CliError> {
        const S: &str = "generate";
        let ds: Dataset<f64> = match (&self.cfg.data.path, &self.cfg.data.generator) {
            (Some(path), _) => {
                let source = match &self.cfg.data.schema {
                    Some(p) => SchemaSource::Sidecar(load_schema_sidecar(p).map_err(|e| e.at(S))?),
                    None => SchemaSource::Infer,
                };
                load_csv(path, source).map_err(|e| e.at(S))?
            }
            (None, Some(g)) => {
                generate_synthetic(&g.build(derive_seed(self.cfg.seed, "generate"))).map_err(|e| e.at(S))?
            }
            (None, None) => return Err(CliError::Config("no data source".into())),
        };
        ds.require_both_classes().map_err(|e| e.at(S))?;
        write_csv(&ds, self.path(DATASET)).map_err(|e| e.at(S))?;
        let schema: std::collections::BTreeMap<&str, FeatureKind> = ds
            .schema()
            .names()
            .iter()
            .map(String::as_str)
            .zip(ds.schema().kinds().iter().copied())
            .collect();
        let text = serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n";
        fs::write(self.path(SCHEMA), text).map_err(|e| CliError::Stage {
            stage: S,
            message: e.to_string(),
        })
    }

    fn balance(&self) -> Result<(), CliError> {
        const S: &str = "balance";
        let ds = self.load(DATASET, S)?;
        let artifact = if self.cfg.resample.enabled {
            let hybrid = self.cfg.resample.hybrid(derive_seed(self.cfg.seed, "balance"));
            let (balanced, audit) = hybrid_balance(&ds, &hybrid).map_err(|e| e.at(S))?;
            write_csv(&balanced, self.path(BALANCED)).map_err(|e| e.at(S))?;
            AuditArtifact {
                resampled: true,
                audit: Some(audit),
            }
        } else {
            write_csv(&ds, self.path(BALANCED)).map_err(|e| e.at(S))?;
            AuditArtifact {
                resampled: false,
                audit: None,
            }
        };
        write_json(&self.path(BALANCE_AUDIT), &self.digest, &artifact, S)
    }

    fn tune(&self) -> Result<(), CliError> {
        const S: &str = "tune";
        let ds = self.load(DATASET, S)?;
        let t = &self.cfg.tune;
        let cfg = TuneConfig {
            budget: t.budget,
            cv_folds: t.cv_folds,
            threshold: self.cfg.evaluate.threshold,
            strategy: t.strategy,
            bayes: t.bayes.clone(),
        };
        let hybrid = self.cfg.resample.hybrid(0);
        let resample = self.cfg.resample.enabled.then_some(&hybrid);
        let result = tune(&ds, &t.space, &cfg, &t.base, resample, derive_seed(self.cfg.seed, "tune"))
            .map_err(|e| e.at(S))?;
        write_json(&self.path(TUNE_RESULT), &self.digest, &result, S)
    }

    fn tuned(&self, stage: &'static str) -> Result<TuneResult, CliError> {
        read_json(&self.path(TUNE_RESULT), &self.digest, stage)
    }

    fn train(&self) -> Result<(), CliError> {
        const S: &str = "train";
        let ds = self.load(BALANCED, S)?;
        let params = self.tuned(S)?.best.params;
        let model = train(&ds, &params, derive_seed(self.cfg.seed, "train")).map_err(|e| e.at(S))?;
        write_json(&self.path(MODEL), &self.digest, &ModelArtifact { model }, S)
    }

    fn evaluate(&self) -> Result<(), CliError> {
        const S: &str = "evaluate";
        let ds = self.load(DATASET, S)?;
        let params = self.tuned(S)?.best.params;
        let hybrid = self.cfg.resample.hybrid(0);
        let resample = self.cfg.resample.enabled.then_some(&hybrid);
        let e = &self.cfg.evaluate;
        let summary = cross_validate(&ds, &params, e.k, derive_seed(self.cfg.seed, "evaluate"), resample, e.threshold)
            .map_err(|e| e.at(S))?;
        write_json(&self.path(METRICS), &self.digest, &summary, S)?;
        fs::write(self.path(METRICS_TABLE), summary.render_table()).map_err(|e| CliError::Stage {
            stage: S,
            message: e.to_string(),
        })
    }

    fn explain(&self) -> Result<(), CliError> {
        const S: &str = "explain";
        let file = match self.cfg.explain.on {
            ExplainOn::Balanced => BALANCED,
            ExplainOn::Dataset => DATASET,
        };
        let ds = self.load(file, S)?;
        let ModelArtifact { model } = read_json(&self.path(MODEL), &self.digest, S)?;
        if model.schema != *ds.schema() {
            return Err(CliError::Stage {
                stage: S,
                message: format!("{file} does not match the model's schema"),
            });
        }
        let sm = shap_matrix(&model, &ds).map_err(|e| e.at(S))?;
        let io = |e: std::io::Error| CliError::Stage {
            stage: S,
            message: e.to_string(),
        };
        let mut shap = std::io::BufWriter::new(fs::File::create(self.path(SHAP)).map_err(io)?);
        sm.write_csv(&mut shap).map_err(io)?;
        drop(shap);

        let ranking = importance_ranking(&sm).map_err(|e| e.at(S))?;
        write_json(&self.path(IMPORTANCE), &self.digest, &ranking, S)?;
        fs::write(self.path(IMPORTANCE_TABLE), ranking.to_string()).map_err(io)?;

        let tree = fit_shap_cart(&sm, ds.labels(), self.cfg.cart()).map_err(|e| e.at(S))?;
        write_json(&self.path(CART), &self.digest, &tree, S)?;
        let mut rules = String::new();
        for r in extract_rules(&tree) {
            rules.push_str(&r.to_string());
            rules.push('\n');
        }
        fs::write(self.path(RULES), rules).map_err(io)
    }
}

/// Output directory: the flag, then the config, then `./out`.
pub fn resolve_out(flag: Option<&Path>, cfg: &PipelineConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}
