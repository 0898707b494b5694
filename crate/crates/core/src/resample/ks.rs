use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{ResampleError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    #[serde(rename = "D")]
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

const SERIES_EPS: f64 = 1e-12;

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample<T: Scalar>(a: &[T], b: &[T]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(ResampleError::EmptySample);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(ResampleError::NonFiniteSample);
    }
    let cmp = |x: &T, y: &T| x.partial_cmp(y).unwrap_or(Ordering::Equal);
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(cmp);
    b.sort_by(cmp);
    let (n1, n2) = (a.len(), b.len());
    let (f1, f2) = (n1 as f64, n2 as f64);

    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n1 && j < n2 {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n1 && a[i] == v {
            i += 1;
        }
        while j < n2 && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / f1 - j as f64 / f2).abs());
    }
    let lambda = d * (f1 * f2 / (f1 + f2)).sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(lambda),
        n1,
        n2,
    })
}

/// `P(K > lambda)` for the Kolmogorov distribution.
///
/// Uses the alternating series `2 sum (-1)^(j-1) exp(-2 j^2 lambda^2)` for
/// `lambda >= 1.18` and the Jacobi theta form of the CDF below that, where
/// the alternating series converges too slowly. Both stop once a term drops
/// under 1e-12.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let w = pi2 / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for j in 1..=100u32 {
            let m = (2 * j - 1) as f64;
            let term = (-m * m * w).exp();
            cdf += term;
            if term < SERIES_EPS {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for j in 1..=100u32 {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            sum += sign * term;
            if term < SERIES_EPS {
                break;
            }
            sign = -sign;
        }
        2.0 * sum
    };
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [3.0, 1.0, 2.0, 2.0];
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn disjoint_supports() {
        let r = ks_two_sample(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn shifted_triplets() {
        // ECDF jumps at 1,2,3,4: |1/3-0|, |2/3-1/3|, |1-2/3|, |1-1| -> max 1/3.
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((r.statistic - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!((r.n1, r.n2), (3, 3));
    }

    #[test]
    fn empty_sample_errors() {
        assert!(matches!(ks_two_sample::<f64>(&[], &[1.0]), Err(ResampleError::EmptySample)));
        assert!(ks_two_sample(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn kolmogorov_reference_points() {
        // Standard critical values: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        // The two series agree where they meet.
        let below = kolmogorov_survival(1.18 - 1e-12);
        let above = kolmogorov_survival(1.18);
        assert!((below - above).abs() < 1e-10);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(0.05) > 0.999_999);
        assert!(kolmogorov_survival(10.0) < 1e-12);
    }
}
