//! Evaluation metrics.

use crate::error::{Error, Result};

/// Root-mean-square error of inferred activation probabilities against a
/// ground truth, normalized by the ground truth's mean:
/// `sqrt(sum (p'(v) - p(v))^2 / n) / (sum p(v) / n)`.
///
/// Zero when the vectors agree exactly. Errors on mismatched lengths and
/// on an all-zero ground truth (the normalization is undefined).
pub fn rmse(ground_truth: &[f64], inferred: &[f64]) -> Result<f64> {
    if ground_truth.len() != inferred.len() {
        return Err(Error::invalid(format!(
            "node sets differ: {} ground-truth values vs {} inferred",
            ground_truth.len(),
            inferred.len()
        )));
    }
    if ground_truth.is_empty() {
        return Err(Error::invalid("rmse over an empty node set"));
    }
    let n = ground_truth.len() as f64;
    let mean: f64 = ground_truth.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::invalid(
            "ground-truth activation probabilities are all zero",
        ));
    }
    let sq: f64 = ground_truth
        .iter()
        .zip(inferred)
        .map(|(p, q)| (q - p) * (q - p))
        .sum();
    Ok((sq / n).sqrt() / mean)
}
