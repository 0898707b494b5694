use serde::{Deserialize, Serialize};

use super::{HpoError, Result};
use crate::gbt::BoostParams;

/// Number of tuned axes.
pub const DIM: usize = 4;

/// Bounds of the tuned axes, each `[lower, upper]`. The learning rate is
/// searched on a log scale; integer axes are rounded after scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub n_trees: [usize; 2],
    pub max_depth: [usize; 2],
    pub learning_rate: [f64; 2],
    pub min_split_gain: [f64; 2],
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            n_trees: [50, 500],
            max_depth: [2, 8],
            learning_rate: [0.01, 0.3],
            min_split_gain: [0.0, 5.0],
        }
    }
}

fn lerp(lo: f64, hi: f64, u: f64) -> f64 {
    lo + u.clamp(0.0, 1.0) * (hi - lo)
}

fn unlerp(lo: f64, hi: f64, v: f64) -> f64 {
    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HpoError::Space(m));
        if self.n_trees[0] >= self.n_trees[1] {
            return bad(format!("n_trees bounds {:?} must be increasing", self.n_trees));
        }
        if self.max_depth[0] >= self.max_depth[1] || self.max_depth[0] == 0 {
            return bad(format!("max_depth bounds {:?} must be increasing and >= 1", self.max_depth));
        }
        let [lo, hi] = self.learning_rate;
        if !(lo > 0.0 && lo < hi && hi <= 1.0) {
            return bad(format!("learning_rate bounds {:?} must satisfy 0 < lo < hi <= 1", self.learning_rate));
        }
        let [lo, hi] = self.min_split_gain;
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return bad(format!("min_split_gain bounds {:?} must be increasing and >= 0", self.min_split_gain));
        }
        Ok(())
    }

    /// Maps a unit-cube point onto parameters, keeping the untuned fields of `base`.
    pub fn from_unit(&self, u: &[f64], base: &BoostParams) -> BoostParams {
        let int = |b: [usize; 2], u: f64| lerp(b[0] as f64, b[1] as f64, u).round() as usize;
        let [llo, lhi] = self.learning_rate;
        BoostParams {
            n_trees: int(self.n_trees, u[0]),
            max_depth: int(self.max_depth, u[1]),
            learning_rate: lerp(llo.ln(), lhi.ln(), u[2]).exp().clamp(llo, lhi),
            min_split_gain: lerp(self.min_split_gain[0], self.min_split_gain[1], u[3]),
            ..base.clone()
        }
    }

    pub fn to_unit(&self, p: &BoostParams) -> [f64; DIM] {
        let int = |b: [usize; 2], v: usize| unlerp(b[0] as f64, b[1] as f64, v as f64);
        let [llo, lhi] = self.learning_rate;
        [
            int(self.n_trees, p.n_trees),
            int(self.max_depth, p.max_depth),
            unlerp(llo.ln(), lhi.ln(), p.learning_rate.ln()),
            unlerp(self.min_split_gain[0], self.min_split_gain[1], p.min_split_gain),
        ]
    }

    /// Moves `u` onto the nearest point that round-trips through parameters.
    pub fn snap(&self, u: &mut [f64]) {
        let p = self.from_unit(u, &BoostParams::default());
        let v = self.to_unit(&p);
        u[0] = v[0];
        u[1] = v[1];
    }

    pub fn contains(&self, p: &BoostParams) -> bool {
        let within = |b: [f64; 2], v: f64| v >= b[0] && v <= b[1];
        (self.n_trees[0]..=self.n_trees[1]).contains(&p.n_trees)
            && (self.max_depth[0]..=self.max_depth[1]).contains(&p.max_depth)
            && within(self.learning_rate, p.learning_rate)
            && within(self.min_split_gain, p.min_split_gain)
    }
}
