use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bayes::{suggest_unit, BayesConfig, Observation};
use super::space::{SearchSpace, DIM};
use super::{HpoError, Result};
use crate::data::Dataset;
use crate::eval::{PreparedFolds, ResampleSpec};
use crate::gbt::BoostParams;
use crate::scalar::Scalar;
use crate::seed::{derive_indexed, derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub params: BoostParams,
    /// Mean cross-validated PR-AUC.
    pub objective: Option<f64>,
    pub objective_std: Option<f64>,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: TrialRecord,
    pub history: Vec<TrialRecord>,
    pub seed: u64,
}

impl TuneResult {
    /// Best objective among the first `n` trials.
    pub fn best_prefix(&self, n: usize) -> Option<f64> {
        self.history[..n.min(self.history.len())]
            .iter()
            .filter_map(|t| t.objective)
            .reduce(f64::max)
    }

    pub fn median_objective(&self) -> Option<f64> {
        let mut v: Vec<f64> = self.history.iter().filter_map(|t| t.objective).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        Some(if v.len() % 2 == 0 { (v[m - 1] + v[m]) / 2.0 } else { v[m] })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Bayesian,
    /// Uniform sampling of the unit cube; a baseline.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneConfig {
    pub budget: usize,
    pub cv_folds: usize,
    pub threshold: f64,
    pub strategy: Strategy,
    pub bayes: BayesConfig,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            budget: 32,
            cv_folds: 10,
            threshold: 0.5,
            strategy: Strategy::Bayesian,
            bayes: BayesConfig::default(),
        }
    }
}

/// Suggests the next parameter point from a trial history.
pub fn suggest(
    history: &[TrialRecord],
    space: &SearchSpace,
    base: &BoostParams,
    cfg: &BayesConfig,
    seed: u64,
) -> BoostParams {
    let obs: Vec<Observation> = history
        .iter()
        .map(|t| Observation {
            x: space.to_unit(&t.params).to_vec(),
            y: t.objective,
        })
        .collect();
    let u = suggest_unit(&obs, DIM, cfg, seed, &|u: &mut [f64]| space.snap(u));
    space.from_unit(&u, base)
}

/// Runs `cfg.budget` trials, each scored by mean cross-validated PR-AUC with
/// rebalancing confined to the training folds.
pub fn tune<T: Scalar>(
    ds: &Dataset<T>,
    space: &SearchSpace,
    cfg: &TuneConfig,
    base: &BoostParams,
    resample: ResampleSpec<'_>,
    seed: u64,
) -> Result<TuneResult> {
    if cfg.budget < 1 {
        return Err(HpoError::Budget);
    }
    space.validate()?;
    let folds = PreparedFolds::new(ds, cfg.cv_folds, derive_seed(seed, "cv"), resample)?;
    let search_seed = derive_seed(seed, "search");
    let mut history: Vec<TrialRecord> = Vec::with_capacity(cfg.budget);
    for trial in 0..cfg.budget {
        let params = match cfg.strategy {
            Strategy::Bayesian => suggest(&history, space, base, &cfg.bayes, search_seed),
            Strategy::Random => {
                let mut rng = rng_from(derive_indexed(search_seed, "random", trial as u64));
                let mut u: Vec<f64> = (0..DIM).map(|_| rng.random::<f64>()).collect();
                space.snap(&mut u);
                space.from_unit(&u, base)
            }
        };
        let record = match folds.evaluate(&params, cfg.threshold) {
            Ok(s) if s.pr_auc.mean.is_some() => TrialRecord {
                trial,
                params,
                objective: s.pr_auc.mean,
                objective_std: s.pr_auc.std,
                status: TrialStatus::Ok,
                error: None,
            },
            Ok(_) => failed(trial, params, "no fold had positives".into()),
            Err(e) => failed(trial, params, e.to_string()),
        };
        log::info!(
            "trial {trial}: objective {:?} (n_trees {}, max_depth {}, lr {:.4}, gamma {:.3})",
            record.objective,
            record.params.n_trees,
            record.params.max_depth,
            record.params.learning_rate,
            record.params.min_split_gain
        );
        history.push(record);
    }
    let best = history
        .iter()
        .filter(|t| t.status == TrialStatus::Ok)
        .fold(None::<&TrialRecord>, |acc, t| match acc {
            Some(b) if b.objective >= t.objective => Some(b),
            _ => Some(t),
        })
        .unwrap_or(&history[0])
        .clone();
    Ok(TuneResult { best, history, seed })
}

fn failed(trial: usize, params: BoostParams, error: String) -> TrialRecord {
    TrialRecord {
        trial,
        params,
        objective: None,
        objective_std: None,
        status: TrialStatus::Failed,
        error: Some(error),
    }
}
