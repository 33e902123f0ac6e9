//! Estimation, prediction, and variable-selection metrics against a known
//! truth.
//!
//! Error conventions follow the simulation study:
//! `l2_beta = p^{-1} ||bhat - b0||^2`, `l2_linpred = n^{-1} ||X(bhat - b0)||^2`,
//! and the prediction errors are mean squared deviations of the fitted means
//! `inv_logit(x_i' bhat)` from the observed responses. When no variable is
//! selected, precision/FDR/F1 are reported as missing rather than 0/0.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::inv_logit;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimationErrors {
    pub l2_beta: f64,
    pub l2_linpred: f64,
    pub l2_y: f64,
    pub l2_ytest: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub specificity: Option<f64>,
    pub fdr: Option<f64>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

/// Full per-replication report for one method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub estimation: EstimationErrors,
    #[serde(flatten)]
    pub selection: SelectionMetrics,
}

impl MetricsReport {
    pub fn combine(estimation: EstimationErrors, selection: SelectionMetrics) -> Self {
        Self {
            estimation,
            selection,
        }
    }
}

/// The four l2 error metrics for an estimate `beta_hat` of `beta0`.
pub fn estimation_errors(
    beta_hat: &DVector<f64>,
    beta0: &DVector<f64>,
    x: &DMatrix<f64>,
    x_test: &DMatrix<f64>,
    y: &DVector<f64>,
    y_test: &DVector<f64>,
) -> Result<EstimationErrors> {
    let p = beta0.len();
    if beta_hat.len() != p || x.ncols() != p || x_test.ncols() != p {
        return Err(Error::Parameter(format!(
            "coefficient/design dimension mismatch (p = {p}, beta_hat = {}, x cols = {}, x_test cols = {})",
            beta_hat.len(),
            x.ncols(),
            x_test.ncols()
        )));
    }
    if y.len() != x.nrows() || y_test.len() != x_test.nrows() {
        return Err(Error::Parameter(
            "response lengths do not match design rows".into(),
        ));
    }

    let diff = beta_hat - beta0;
    let l2_beta = diff.norm_squared() / p as f64;
    let lin_diff = x * &diff;
    let l2_linpred = lin_diff.norm_squared() / x.nrows() as f64;

    let l2_y = mean_squared_prediction_error(x, beta_hat, y);
    let l2_ytest = mean_squared_prediction_error(x_test, beta_hat, y_test);

    Ok(EstimationErrors {
        l2_beta,
        l2_linpred,
        l2_y,
        l2_ytest,
    })
}

fn mean_squared_prediction_error(x: &DMatrix<f64>, beta: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let eta = x * beta;
    let n = x.nrows();
    (0..n)
        .map(|i| {
            let e = y[i] - inv_logit(eta[i]);
            e * e
        })
        .sum::<f64>()
        / n as f64
}

/// Confusion counts and rates of a selection against the true support.
pub fn selection_metrics(selected: &[bool], beta0: &DVector<f64>) -> Result<SelectionMetrics> {
    if selected.len() != beta0.len() {
        return Err(Error::Parameter(format!(
            "selection length {} does not match p = {}",
            selected.len(),
            beta0.len()
        )));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut tn = 0usize;
    let mut fn_ = 0usize;
    for (sel, &b) in selected.iter().zip(beta0.iter()) {
        match (*sel, b != 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }

    let ratio = |num: usize, den: usize| -> Option<f64> {
        (den > 0).then(|| num as f64 / den as f64)
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let specificity = ratio(tn, tn + fp);
    let fdr = ratio(fp, tp + fp);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };

    Ok(SelectionMetrics {
        precision,
        recall,
        f1,
        specificity,
        fdr,
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_recovery_zeros_structural_errors() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.5, -1.0, 0.2, 0.3]);
        let xt = x.clone();
        let beta0 = DVector::from_row_slice(&[1.0, -1.0]);
        let eta = &x * &beta0;
        let y = DVector::from_fn(3, |i, _| inv_logit(eta[i]));
        let e = estimation_errors(&beta0, &beta0, &x, &xt, &y, &y).unwrap();
        assert_eq!(e.l2_beta, 0.0);
        assert_eq!(e.l2_linpred, 0.0);
        // responses equal the fitted means exactly here, so prediction
        // error is zero too; irreducible noise appears with real draws
        assert!(e.l2_y < 1e-30);
    }

    #[test]
    fn hand_computed_instance() {
        // p = 2, n = 1, X = [1, 1], bhat = [1, 0], b0 = [0, 1]:
        // l2_beta = (1 + 1)/2 = 1, linear predictors agree so l2_linpred = 0.
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let beta_hat = DVector::from_row_slice(&[1.0, 0.0]);
        let beta0 = DVector::from_row_slice(&[0.0, 1.0]);
        let y = DVector::from_row_slice(&[0.5]);
        let e = estimation_errors(&beta_hat, &beta0, &x, &x, &y, &y).unwrap();
        assert!((e.l2_beta - 1.0).abs() < 1e-15);
        assert!(e.l2_linpred.abs() < 1e-15);
    }

    #[test]
    fn zero_everything_is_zero_error() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 0.5]);
        let z = DVector::zeros(2);
        let y = DVector::from_row_slice(&[0.5, 0.5]);
        let e = estimation_errors(&z, &z, &x, &x, &y, &y).unwrap();
        assert_eq!(e.l2_beta, 0.0);
        assert_eq!(e.l2_linpred, 0.0);
        assert_eq!(e.l2_y, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b2 = DVector::zeros(2);
        let b3 = DVector::zeros(3);
        let y = DVector::from_row_slice(&[0.5]);
        assert!(estimation_errors(&b3, &b2, &x, &x, &y, &y).is_err());
    }

    #[test]
    fn selection_perfect_and_everything() {
        let beta0 = DVector::from_row_slice(&[1.0, -1.0, 0.0, 0.0]);
        let truth = [true, true, false, false];
        let m = selection_metrics(&truth, &beta0).unwrap();
        assert_eq!(m.precision, Some(1.0));
        assert_eq!(m.recall, Some(1.0));
        assert_eq!(m.f1, Some(1.0));
        assert_eq!(m.specificity, Some(1.0));
        assert_eq!(m.fdr, Some(0.0));

        let all = [true; 4];
        let m = selection_metrics(&all, &beta0).unwrap();
        assert_eq!(m.recall, Some(1.0));
        assert_eq!(m.precision, Some(0.5)); // s*/p
        assert_eq!(m.specificity, Some(0.0));
    }

    #[test]
    fn empty_selection_reports_missing() {
        let beta0 = DVector::from_row_slice(&[1.0, 0.0]);
        let m = selection_metrics(&[false, false], &beta0).unwrap();
        assert_eq!(m.precision, None);
        assert_eq!(m.fdr, None);
        assert_eq!(m.f1, None);
        assert_eq!(m.recall, Some(0.0));
        assert_eq!(m.true_positives + m.false_negatives, 1);
    }

    #[test]
    fn precision_plus_fdr_is_one() {
        let beta0 = DVector::from_row_slice(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        let sel = [true, false, true, false, true];
        let m = selection_metrics(&sel, &beta0).unwrap();
        let (p, f) = (m.precision.unwrap(), m.fdr.unwrap());
        assert!((p + f - 1.0).abs() < 1e-15);
    }

    #[test]
    fn metrics_invariant_under_joint_permutation() {
        let beta0 = DVector::from_row_slice(&[1.0, 0.0, -1.0, 0.0]);
        let sel = [true, true, false, false];
        let a = selection_metrics(&sel, &beta0).unwrap();

        let perm = [3usize, 2, 0, 1];
        let beta0p = DVector::from_fn(4, |j, _| beta0[perm[j]]);
        let selp: Vec<bool> = perm.iter().map(|&j| sel[j]).collect();
        let b = selection_metrics(&selp, &beta0p).unwrap();
        assert_eq!(a.true_positives, b.true_positives);
        assert_eq!(a.false_positives, b.false_positives);
        assert_eq!(a.precision, b.precision);
        assert_eq!(a.f1, b.f1);
    }

    #[test]
    fn counts_partition_support() {
        let beta0 = DVector::from_row_slice(&[1.0, -1.0, 0.0, 0.0, 0.0]);
        let sel = [true, false, true, false, false];
        let m = selection_metrics(&sel, &beta0).unwrap();
        assert_eq!(m.true_positives + m.false_negatives, 2); // s*
        assert_eq!(m.false_positives + m.true_negatives, 3); // p - s*
    }
}
