use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

const LENGTHSCALES: [f64; 5] = [0.05, 0.1, 0.2, 0.4, 0.8];
const VARIANCES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

fn matern52(r: f64, lengthscale: f64, variance: f64) -> f64 {
    let s = 5f64.sqrt() * r / lengthscale;
    variance * (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Zero-mean GP on standardized targets with a Matérn-5/2 kernel.
/// Kernel lengthscale and signal variance are picked from a fixed grid by
/// log marginal likelihood.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    x: Vec<Vec<f64>>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    y_mean: f64,
    y_scale: f64,
    pub lengthscale: f64,
    pub variance: f64,
    pub noise: f64,
    pub log_marginal_likelihood: f64,
}

impl GaussianProcess {
    /// `None` for empty input or when no grid point factorizes.
    pub fn fit(x: &[Vec<f64>], y: &[f64], noise: f64) -> Option<Self> {
        let n = y.len();
        if n == 0 || x.len() != n {
            return None;
        }
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
        let y_scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let ys = DVector::from_iterator(n, y.iter().map(|v| (v - y_mean) / y_scale));

        let mut dist = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let d = distance(&x[i], &x[j]);
                dist[(i, j)] = d;
                dist[(j, i)] = d;
            }
        }

        let mut best: Option<Self> = None;
        for &lengthscale in &LENGTHSCALES {
            for &variance in &VARIANCES {
                let mut k = dist.map(|r| matern52(r, lengthscale, variance));
                for i in 0..n {
                    k[(i, i)] += noise;
                }
                let Some(chol) = Cholesky::new(k) else { continue };
                let alpha = chol.solve(&ys);
                let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
                let lml = -0.5 * ys.dot(&alpha) - 0.5 * log_det
                    - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
                if !lml.is_finite() {
                    continue;
                }
                if best.as_ref().is_none_or(|b| lml > b.log_marginal_likelihood) {
                    best = Some(Self {
                        x: x.to_vec(),
                        chol,
                        alpha,
                        y_mean,
                        y_scale,
                        lengthscale,
                        variance,
                        noise,
                        log_marginal_likelihood: lml,
                    });
                }
            }
        }
        best
    }

    /// Posterior mean and standard deviation on the original target scale.
    /// The standard deviation excludes observation noise.
    pub fn predict(&self, q: &[f64]) -> (f64, f64) {
        let kq = DVector::from_iterator(
            self.x.len(),
            self.x.iter().map(|xi| matern52(distance(xi, q), self.lengthscale, self.variance)),
        );
        let mean = kq.dot(&self.alpha);
        let v = self.chol.l_dirty().solve_lower_triangular(&kq).unwrap_or_else(|| kq.clone());
        let var = (self.variance - v.dot(&v)).max(0.0);
        (
            self.y_mean + self.y_scale * mean,
            self.y_scale * var.sqrt(),
        )
    }
}
