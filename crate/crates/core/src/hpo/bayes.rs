use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::gp::GaussianProcess;
use crate::seed::{derive_indexed, derive_seed, rng_from};

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BayesConfig {
    /// Size of the Latin-hypercube initial design.
    pub n_init: usize,
    pub n_candidates: usize,
    /// Coordinate step for the incumbent's neighbors.
    pub neighbor_step: f64,
    pub noise: f64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self {
            n_init: 8,
            n_candidates: 2048,
            neighbor_step: 0.05,
            noise: 1e-6,
        }
    }
}

/// An evaluated unit-cube point; `y = None` marks a failed evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x: Vec<f64>,
    pub y: Option<f64>,
}

/// `n` points in `[0,1]^dim`, one per stratum on every axis.
pub fn latin_hypercube(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from(seed);
    let mut pts = vec![vec![0.0; dim]; n];
    for d in 0..dim {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        for (p, &s) in pts.iter_mut().zip(&perm) {
            p[d] = (s as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    pts
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

fn shifted_halton(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (1..=n as u64)
        .map(|i| {
            (0..dim)
                .map(|d| (radical_inverse(i, PRIMES[d % PRIMES.len()]) + shift[d]).fract())
                .collect()
        })
        .collect()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement over `best` for maximization. Never negative.
pub fn expected_improvement(mean: f64, sd: f64, best: f64) -> f64 {
    let gap = mean - best;
    if sd <= 1e-12 {
        return gap.max(0.0);
    }
    let z = gap / sd;
    (gap * std_normal_cdf(z) + sd * std_normal_pdf(z)).max(0.0)
}

/// Next point to evaluate given past observations. The first `n_init` calls
/// walk a Latin-hypercube design; later calls maximize Expected Improvement
/// of a GP fitted to the successful observations. `snap` maps a raw
/// candidate onto a feasible point before it is scored.
pub fn suggest_unit(
    history: &[Observation],
    dim: usize,
    cfg: &BayesConfig,
    seed: u64,
    snap: &(dyn Fn(&mut [f64]) + Sync),
) -> Vec<f64> {
    let t = history.len();
    let finish = |mut u: Vec<f64>| {
        snap(&mut u);
        u
    };
    if t < cfg.n_init {
        let design = latin_hypercube(cfg.n_init, dim, derive_seed(seed, "design"));
        return finish(design[t].clone());
    }
    let ok: Vec<(&Vec<f64>, f64)> = history.iter().filter_map(|o| o.y.map(|y| (&o.x, y))).collect();
    let xs: Vec<Vec<f64>> = ok.iter().map(|(x, _)| (*x).clone()).collect();
    let ys: Vec<f64> = ok.iter().map(|(_, y)| *y).collect();
    let Some(gp) = GaussianProcess::fit(&xs, &ys, cfg.noise) else {
        let mut rng = rng_from(derive_indexed(seed, "random", t as u64));
        return finish((0..dim).map(|_| rng.random::<f64>()).collect());
    };

    let (best_i, best_y) = ys
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &y)| if y > acc.1 { (i, y) } else { acc });
    let mut candidates = shifted_halton(cfg.n_candidates, dim, derive_indexed(seed, "halton", t as u64));
    for d in 0..dim {
        for sign in [-1.0, 1.0] {
            let mut c = xs[best_i].clone();
            c[d] = (c[d] + sign * cfg.neighbor_step).clamp(0.0, 1.0);
            candidates.push(c);
        }
    }
    let scored: Vec<(Vec<f64>, f64)> = candidates
        .into_par_iter()
        .map(|mut c| {
            snap(&mut c);
            let (m, s) = gp.predict(&c);
            let ei = expected_improvement(m, s, best_y);
            (c, ei)
        })
        .collect();
    let mut best = 0;
    for (i, (_, ei)) in scored.iter().enumerate() {
        if *ei > scored[best].1 {
            best = i;
        }
    }
    scored.into_iter().nth(best).map(|(c, _)| c).unwrap_or_default()
}

/// Runs `budget` sequential suggestions against `objective`.
pub fn optimize(
    dim: usize,
    budget: usize,
    cfg: &BayesConfig,
    seed: u64,
    snap: &(dyn Fn(&mut [f64]) + Sync),
    mut objective: impl FnMut(&[f64]) -> Option<f64>,
) -> Vec<Observation> {
    let mut history = Vec::with_capacity(budget);
    for _ in 0..budget {
        let x = suggest_unit(&history, dim, cfg, seed, snap);
        let y = objective(&x).filter(|v| v.is_finite());
        history.push(Observation { x, y });
    }
    history
}
