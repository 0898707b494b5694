use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ExplainError, Result, ShapMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub index: usize,
    pub mean_abs_shap: f64,
    /// Percentage of the total mean |SHAP|; entries sum to 100.
    pub share: f64,
}

/// Features sorted by descending share, ties by column index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedImportance {
    pub entries: Vec<ImportanceEntry>,
}

impl RankedImportance {
    pub fn top(&self, n: usize) -> &[ImportanceEntry] {
        &self.entries[..n.min(self.entries.len())]
    }

    pub fn position(&self, feature: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.feature == feature)
    }
}

impl fmt::Display for RankedImportance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.entries.iter().map(|e| e.feature.len()).max().unwrap_or(0);
        for e in &self.entries {
            writeln!(f, "{:<width$}  {:.2}%", e.feature, e.share)?;
        }
        Ok(())
    }
}

/// Mean absolute SHAP value per feature as a share of the total.
/// An all-zero matrix gets equal shares.
pub fn importance_ranking<T: Scalar>(sm: &ShapMatrix<T>) -> Result<RankedImportance> {
    if sm.rows.is_empty() {
        return Err(ExplainError::Empty);
    }
    let d = sm.n_features();
    let n = sm.rows.len() as f64;
    let mut mean_abs = vec![0.0f64; d];
    for r in &sm.rows {
        if r.phi.len() != d {
            return Err(ExplainError::SchemaMismatch { expected: d, found: r.phi.len() });
        }
        for (m, v) in mean_abs.iter_mut().zip(&r.phi) {
            *m += v.as_f64().abs();
        }
    }
    mean_abs.iter_mut().for_each(|m| *m /= n);
    let total: f64 = mean_abs.iter().sum();
    let mut entries: Vec<ImportanceEntry> = mean_abs
        .iter()
        .enumerate()
        .map(|(index, &m)| ImportanceEntry {
            feature: sm.feature_names[index].clone(),
            index,
            mean_abs_shap: m,
            share: if total > 0.0 { 100.0 * m / total } else { 100.0 / d as f64 },
        })
        .collect();
    entries.sort_by(|a, b| b.share.total_cmp(&a.share).then(a.index.cmp(&b.index)));
    Ok(RankedImportance { entries })
}
