use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, FeatureKind, FeatureSchema, Matrix, Result};
use crate::scalar::Scalar;
use crate::seed::rng_from;

/// Marginal distribution of one generated feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Marginal {
    /// `floor(exp(log_mean + log_sd * z))`, a heavy-tailed count.
    Count { log_mean: f64, log_sd: f64 },
    /// `exp(log_mean + log_sd * z)`, a positive monetary-like amount.
    Continuous { log_mean: f64, log_sd: f64 },
    Binary { p: f64 },
}

impl Marginal {
    pub fn kind(&self) -> FeatureKind {
        match self {
            Marginal::Count { .. } => FeatureKind::Count,
            Marginal::Continuous { .. } => FeatureKind::Continuous,
            Marginal::Binary { .. } => FeatureKind::Binary,
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Count { log_mean, log_sd } => {
                let z: f64 = rng.sample(StandardNormal);
                (log_mean + log_sd * z).exp().floor()
            }
            Marginal::Continuous { log_mean, log_sd } => {
                let z: f64 = rng.sample(StandardNormal);
                (log_mean + log_sd * z).exp()
            }
            Marginal::Binary { p } => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Scale on which the planted coefficient acts.
    fn signal(&self, x: f64) -> f64 {
        match self {
            Marginal::Count { .. } => x.ln_1p(),
            Marginal::Continuous { .. } => x.ln(),
            Marginal::Binary { .. } => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub coefficient: f64,
    #[serde(flatten)]
    pub marginal: Marginal,
}

impl FeatureSpec {
    fn new(name: &str, coefficient: f64, marginal: Marginal) -> Self {
        Self {
            name: name.to_owned(),
            coefficient,
            marginal,
        }
    }
}

/// Settings for [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n: usize,
    pub prevalence: f64,
    pub features: Vec<FeatureSpec>,
    pub intercept: f64,
    pub noise_std: f64,
    pub seed: u64,
}

/// Prevalence of customers who exported data.
pub const OUTFLOW_PREVALENCE: f64 = 0.0038;
/// Prevalence of customers who imported data.
pub const INFLOW_PREVALENCE: f64 = 0.00093;

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self::outflow(50_000, 0)
    }
}

impl GeneratorConfig {
    pub fn outflow(n: usize, seed: u64) -> Self {
        Self {
            n,
            prevalence: OUTFLOW_PREVALENCE,
            features: default_features([1.4, 0.9, 0.6, 0.8, -0.5, -0.4, 0.7, -0.4]),
            intercept: -6.0,
            noise_std: 0.3,
            seed,
        }
    }

    pub fn inflow(n: usize, seed: u64) -> Self {
        Self {
            n,
            prevalence: INFLOW_PREVALENCE,
            features: default_features([1.2, 1.4, 0.5, 0.6, -0.4, -0.6, 0.9, -0.5]),
            intercept: -7.0,
            noise_std: 0.3,
            seed,
        }
    }

    pub fn positives(&self) -> usize {
        (self.n as f64 * self.prevalence).round() as usize
    }

    pub fn schema(&self) -> Result<FeatureSchema> {
        FeatureSchema::new(
            self.features.iter().map(|f| f.name.clone()).collect(),
            self.features.iter().map(|f| f.marginal.kind()).collect(),
        )
    }

    /// Index of the feature with the largest absolute coefficient (first on ties).
    pub fn strongest_feature(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, f) in self.features.iter().enumerate() {
            let a = f.coefficient.abs();
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((j, a));
            }
        }
        best.map(|(j, _)| j)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DataError::Generator(m));
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return bad(format!("prevalence {} outside (0,1)", self.prevalence));
        }
        if (self.n as f64) * self.prevalence < 1.0 {
            return bad(format!(
                "n * prevalence = {} < 1; no positive row would exist",
                self.n as f64 * self.prevalence
            ));
        }
        if self.positives() >= self.n {
            return bad("every row would be positive".into());
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std {} must be nonnegative", self.noise_std));
        }
        if self.features.is_empty() {
            return bad("no features".into());
        }
        for f in &self.features {
            if !f.coefficient.is_finite() {
                return bad(format!("coefficient of {} is not finite", f.name));
            }
            match f.marginal {
                Marginal::Binary { p } if !(0.0..=1.0).contains(&p) => {
                    return bad(format!("{}: p = {p} outside [0,1]", f.name))
                }
                Marginal::Count { log_sd, .. } | Marginal::Continuous { log_sd, .. }
                    if !(log_sd >= 0.0 && log_sd.is_finite()) =>
                {
                    return bad(format!("{}: log_sd = {log_sd} must be nonnegative", f.name))
                }
                _ => {}
            }
        }
        self.schema()?;
        Ok(())
    }
}

fn default_features(coef: [f64; 8]) -> Vec<FeatureSpec> {
    use Marginal::*;
    vec![
        FeatureSpec::new("mobile_interactions", coef[0], Count { log_mean: 2.5, log_sd: 1.0 }),
        FeatureSpec::new("mobile_transactions", coef[1], Count { log_mean: 2.0, log_sd: 1.0 }),
        FeatureSpec::new("digital_interactions", coef[2], Count { log_mean: 1.5, log_sd: 1.0 }),
        FeatureSpec::new("digital_activity", coef[3], Binary { p: 0.6 }),
        FeatureSpec::new("credit_value_total", coef[4], Continuous { log_mean: 8.0, log_sd: 1.2 }),
        FeatureSpec::new("national_card_credit", coef[5], Continuous { log_mean: 7.0, log_sd: 1.0 }),
        FeatureSpec::new("overdue_credit", coef[6], Binary { p: 0.08 }),
        FeatureSpec::new("education_masters", coef[7], Binary { p: 0.1 }),
        FeatureSpec::new("tenure_months", 0.0, Count { log_mean: 3.5, log_sd: 0.6 }),
        FeatureSpec::new("avg_balance", 0.0, Continuous { log_mean: 7.5, log_sd: 1.3 }),
    ]
}

/// Draws features row by row, scores each row with the planted logit and
/// labels the `round(n * prevalence)` highest scores positive (ties go to the
/// lower row index).
pub fn generate_synthetic<T: Scalar>(cfg: &GeneratorConfig) -> Result<Dataset<T>> {
    cfg.validate()?;
    let schema = cfg.schema()?;
    let d = cfg.features.len();
    let mut rng = rng_from(cfg.seed);
    let mut data = Vec::with_capacity(cfg.n * d);
    let mut scores = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let mut score = cfg.intercept;
        for f in &cfg.features {
            let x = f.marginal.draw(&mut rng);
            score += f.coefficient * f.marginal.signal(x);
            data.push(T::lit(x));
        }
        let z: f64 = rng.sample(StandardNormal);
        scores.push(score + cfg.noise_std * z);
    }
    let mut order: Vec<usize> = (0..cfg.n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut labels = vec![0u8; cfg.n];
    for &i in order.iter().take(cfg.positives()) {
        labels[i] = 1;
    }
    Dataset::new(schema, Matrix::from_row_major(data, cfg.n, d), labels)
}
