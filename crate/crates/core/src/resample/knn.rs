use std::cmp::Ordering;

use crate::data::Matrix;
use crate::scalar::Scalar;

#[inline]
pub(crate) fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .fold(T::zero(), |s, v| s + v)
}

/// The `k` smallest `(distance, index)` pairs seen so far, ascending.
struct Smallest<T> {
    k: usize,
    items: Vec<(T, usize)>,
}

impl<T: Scalar> Smallest<T> {
    fn new(k: usize) -> Self {
        Self { k, items: Vec::with_capacity(k + 1) }
    }

    #[inline]
    fn offer(&mut self, d: T, i: usize) {
        if self.items.len() == self.k {
            match self.items.last() {
                Some(&(ld, li)) if d < ld || (d == ld && i < li) => {
                    self.items.pop();
                }
                _ => return,
            }
        }
        let at = self
            .items
            .partition_point(|&(pd, pi)| pd < d || (pd == d && pi < i));
        self.items.insert(at, (d, i));
    }
}

/// The `k` rows of `points` among `candidates` closest to `query`, nearest
/// first, ties broken by lower row index. `exclude` is skipped.
pub fn k_nearest<T: Scalar>(
    points: &Matrix<T>,
    query: &[T],
    candidates: &[usize],
    k: usize,
    exclude: Option<usize>,
) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let mut best = Smallest::new(k);
    for &i in candidates {
        if Some(i) != exclude {
            best.offer(squared_distance(points.row(i), query), i);
        }
    }
    best.items.into_iter().map(|(_, i)| i).collect()
}

/// Mean Euclidean distance from `query` to its `k` nearest (or farthest)
/// rows among `candidates`.
pub(crate) fn mean_extreme_distance<T: Scalar>(
    points: &Matrix<T>,
    query: &[T],
    candidates: &[usize],
    k: usize,
    farthest: bool,
) -> T {
    let k = k.min(candidates.len());
    if k == 0 {
        return T::zero();
    }
    let mut best = Smallest::new(k);
    for &i in candidates {
        let d = squared_distance(points.row(i), query);
        best.offer(if farthest { -d } else { d }, i);
    }
    let mut dist: Vec<T> = best.items.iter().map(|&(d, _)| d.abs().sqrt()).collect();
    dist.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    dist.iter().copied().sum::<T>() / T::from_usize_lossy(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_with_ties_and_exclusion() {
        let m = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![-1.0], vec![3.0]], 1);
        let all = [0, 1, 2, 3];
        assert_eq!(k_nearest(&m, &[0.0], &all, 2, Some(0)), vec![1, 2]);
        assert_eq!(k_nearest(&m, &[0.0], &all, 10, None), vec![0, 1, 2, 3]);
        assert_eq!(k_nearest(&m, &[2.9], &all, 1, None), vec![3]);
    }

    #[test]
    fn mean_extremes() {
        let m = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![4.0]], 1);
        let c = [0, 1, 2];
        assert_eq!(mean_extreme_distance(&m, &[0.0], &c, 2, false), 1.5);
        assert_eq!(mean_extreme_distance(&m, &[0.0], &c, 2, true), 3.0);
    }
}
