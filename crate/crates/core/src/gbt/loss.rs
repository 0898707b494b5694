use crate::scalar::{sigmoid, softplus, Scalar};

/// Per-row gradient `p - y` and hessian `p (1 - p)` of the logistic loss,
/// with `p = sigmoid(margin)`.
pub fn grad_hess_logistic<T: Scalar>(labels: &[u8], margins: &[T]) -> (Vec<T>, Vec<T>) {
    assert_eq!(labels.len(), margins.len(), "labels and margins must align");
    labels
        .iter()
        .zip(margins)
        .map(|(&y, &m)| {
            let p = sigmoid(m);
            let y = if y == 1 { T::one() } else { T::zero() };
            (p - y, p * (T::one() - p))
        })
        .unzip()
}

/// `-[y ln p + (1-y) ln(1-p)]` evaluated on the margin without overflow.
#[inline]
pub fn logistic_loss<T: Scalar>(label: u8, margin: T) -> T {
    if label == 1 {
        softplus(-margin)
    } else {
        softplus(margin)
    }
}

pub fn mean_logistic_loss<T: Scalar>(labels: &[u8], margins: &[T]) -> T {
    let total: T = labels
        .iter()
        .zip(margins)
        .map(|(&y, &m)| logistic_loss(y, m))
        .sum();
    total / T::from_usize_lossy(labels.len().max(1))
}
