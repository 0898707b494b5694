use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adasyn::{adasyn_with_scaler, AdasynConfig};
use super::ks::ks_two_sample;
use super::nearmiss::{nearmiss_with_scaler, NearmissConfig, NearmissVariant};
use super::{ResampleError, Result};
use crate::data::{ClassCounts, Dataset, ScalerParams};
use crate::scalar::Scalar;

/// NEARMISS settings for the hybrid chain; the target count is derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NearmissSettings {
    pub variant: NearmissVariant,
    pub k_neighbors: usize,
}

impl Default for NearmissSettings {
    fn default() -> Self {
        Self {
            variant: NearmissVariant::NearMiss1,
            k_neighbors: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybridConfig {
    pub adasyn: AdasynConfig,
    pub nearmiss: NearmissSettings,
    /// KS significance level.
    pub alpha: f64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            adasyn: AdasynConfig::default(),
            nearmiss: NearmissSettings::default(),
            alpha: 0.01,
        }
    }
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        self.adasyn.validate()?;
        if self.nearmiss.k_neighbors == 0 {
            return Err(ResampleError::Config("NEARMISS k_neighbors must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ResampleError::Config(format!("alpha {} outside (0,1)", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditStep {
    Adasyn,
    Nearmiss,
}

/// One per-feature KS comparison of a resampling step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub step: AuditStep,
    pub feature: String,
    #[serde(rename = "D")]
    pub d: f64,
    pub p_value: f64,
    pub pass: bool,
    pub counts_before: ClassCounts,
    pub counts_after: ClassCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceAudit {
    pub alpha: f64,
    pub counts_initial: ClassCounts,
    pub counts_after_adasyn: ClassCounts,
    pub counts_final: ClassCounts,
    /// ADASYN entries (original vs augmented minority) then NEARMISS entries
    /// (original vs retained majority), each in feature order.
    pub entries: Vec<AuditEntry>,
}

impl BalanceAudit {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

fn audit_step<T: Scalar>(
    step: AuditStep,
    before: &Dataset<T>,
    after: &Dataset<T>,
    class: u8,
    alpha: f64,
) -> Result<Vec<AuditEntry>> {
    let (counts_before, counts_after) = (before.class_counts(), after.class_counts());
    (0..before.n_features())
        .into_par_iter()
        .map(|j| {
            let ks = ks_two_sample(&before.class_column(j, class), &after.class_column(j, class))?;
            Ok(AuditEntry {
                step,
                feature: before.schema().name(j).to_owned(),
                d: ks.statistic,
                p_value: ks.p_value,
                pass: ks.p_value >= alpha,
                counts_before,
                counts_after,
            })
        })
        .collect()
}

/// ADASYN raises the minority, then NEARMISS cuts the majority down to the
/// augmented minority count. Both steps measure distance with one scaler fit
/// on `ds`; each step is followed by a per-feature KS audit.
pub fn hybrid_balance<T: Scalar>(
    ds: &Dataset<T>,
    cfg: &HybridConfig,
) -> Result<(Dataset<T>, BalanceAudit)> {
    cfg.validate()?;
    let scaler = ScalerParams::fit(ds);
    let over = adasyn_with_scaler(ds, &cfg.adasyn, &scaler)?;
    let mut entries = audit_step(AuditStep::Adasyn, ds, &over.dataset, 1, cfg.alpha)?;

    let augmented = over.counts_after;
    let target = augmented.positives.min(augmented.negatives);
    let nm_cfg = NearmissConfig {
        variant: cfg.nearmiss.variant,
        k_neighbors: cfg.nearmiss.k_neighbors,
        target_count: target,
    };
    let under = nearmiss_with_scaler(&over.dataset, &nm_cfg, &scaler)?;
    entries.extend(audit_step(AuditStep::Nearmiss, &over.dataset, &under.dataset, 0, cfg.alpha)?);

    let audit = BalanceAudit {
        alpha: cfg.alpha,
        counts_initial: over.counts_before,
        counts_after_adasyn: augmented,
        counts_final: under.counts_after,
        entries,
    };
    Ok((under.dataset, audit))
}
