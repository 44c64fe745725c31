use ndarray::{ArrayView, ArrayView1, Dimension, Zip};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mean of squared elementwise differences over all entries.
pub fn compute_mse<T: Real, D: Dimension>(pred: ArrayView<'_, T, D>, truth: ArrayView<'_, T, D>) -> Result<T> {
    if pred.shape() != truth.shape() {
        return Err(Error::Dimension(format!(
            "prediction shape {:?} differs from truth shape {:?}",
            pred.shape(),
            truth.shape()
        )));
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("no entries to score".into()));
    }
    let mut sum = T::zero();
    Zip::from(&pred).and(&truth).for_each(|&p, &t| sum += (p - t) * (p - t));
    Ok(sum / T::from_usize_lossy(pred.len()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryMetrics<T> {
    /// Mean squared gap between probability and label.
    pub prob_mse: T,
    /// Share of samples whose thresholded probability disagrees with the label.
    pub misclassification: T,
}

/// Probability MSE and misclassification at threshold 0.5 (ties go to class 1).
pub fn compute_binary_metrics<T: Real>(prob: ArrayView1<'_, T>, labels: ArrayView1<'_, T>) -> Result<BinaryMetrics<T>> {
    if let Some(p) = prob.iter().find(|&&p| !(p >= T::zero() && p <= T::one())) {
        return Err(Error::Metric(format!("probability {p} outside [0, 1]")));
    }
    if let Some(l) = labels.iter().find(|&&l| l != T::zero() && l != T::one()) {
        return Err(Error::Metric(format!("label {l} is not 0 or 1")));
    }
    let prob_mse = compute_mse(prob, labels)?;
    let half = T::lit(0.5);
    let wrong = prob
        .iter()
        .zip(labels)
        .filter(|(&p, &l)| (p >= half) != (l == T::one()))
        .count();
    Ok(BinaryMetrics {
        prob_mse,
        misclassification: T::from_usize_lossy(wrong) / T::from_usize_lossy(prob.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identical_inputs_have_zero_mse() {
        let a = array![1.0, -2.0, 3.5];
        assert_eq!(compute_mse(a.view(), a.view()).unwrap(), 0.0);
    }

    #[test]
    fn unit_gap_has_unit_mse() {
        assert_eq!(
            compute_mse(array![0.0, 0.0].view(), array![1.0, 1.0].view()).unwrap(),
            1.0
        );
    }

    #[test]
    fn matrix_mse_averages_all_entries() {
        let p = array![[1.0, 2.0], [3.0, 4.0]];
        let t = array![[1.0, 0.0], [0.0, 4.0]];
        // (0 + 4 + 9 + 0) / 4
        assert_eq!(compute_mse(p.view(), t.view()).unwrap(), 3.25);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        assert!(compute_mse(array![1.0].view(), array![1.0, 2.0].view()).is_err());
    }

    #[test]
    fn exact_probabilities_score_zero() {
        let l = array![0.0, 1.0, 1.0];
        let m = compute_binary_metrics(l.view(), l.view()).unwrap();
        assert_eq!((m.prob_mse, m.misclassification), (0.0, 0.0));
    }

    #[test]
    fn constant_half_on_balanced_labels() {
        let m = compute_binary_metrics(array![0.5, 0.5, 0.5, 0.5].view(), array![0.0, 1.0, 0.0, 1.0].view()).unwrap();
        assert_eq!(m.prob_mse, 0.25);
        // ties go to class 1, so both zeros are misclassified
        assert_eq!(m.misclassification, 0.5);
    }

    #[test]
    fn four_point_hand_instance() {
        let p = array![0.9, 0.2, 0.6, 0.4];
        let l = array![1.0, 0.0, 0.0, 1.0];
        let m = compute_binary_metrics(p.view(), l.view()).unwrap();
        // (0.01 + 0.04 + 0.36 + 0.36) / 4
        assert!((m.prob_mse - 0.1925f64).abs() < 1e-15);
        assert_eq!(m.misclassification, 0.5);
    }

    #[test]
    fn out_of_range_probability_is_a_metric_error() {
        let r = compute_binary_metrics(array![1.5].view(), array![1.0].view());
        assert!(matches!(r, Err(Error::Metric(_))));
    }
}
