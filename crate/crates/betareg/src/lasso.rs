//! Transformed-response Lasso comparator.
//!
//! Responses are logit-transformed, then an l1-penalized linear model is fit
//! by cyclic coordinate descent on column-standardized predictors along a
//! log-spaced penalty grid with warm starts; the penalty is chosen by
//! 10-fold cross-validation (CV-minimizer rule) and the final model is refit
//! on the full data. Coefficients are reported on the original scale.
//!
//! Internal objective, standardized scale:
//! `(1/2n) ||yc - Xs b||^2 + lambda ||b||_1` with `(1/n) Xs_j' Xs_j = 1`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::inv_logit;

const CD_TOL: f64 = 1e-10;
const CD_MAX_SWEEPS: usize = 100_000;
const GRID_FLOOR_RATIO: f64 = 1e-4;
const CV_FOLDS: usize = 10;
const CONSTANT_SD: f64 = 1e-12;

/// Fitted Lasso model with its cross-validation record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoFit {
    /// Original-scale coefficients at the selected penalty.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Decreasing penalty grid (standardized scale).
    pub lambda_grid: Vec<f64>,
    /// Mean squared CV error per grid point, on the transformed response.
    pub cv_mean_error: Vec<f64>,
    pub lambda_selected: f64,
    /// Columns with zero variance; their coefficients are fixed at 0.
    pub constant_columns: Vec<usize>,
}

/// Componentwise logit transform `y* = log(y / (1 - y))`.
pub fn transform_response(y: &DVector<f64>) -> Result<DVector<f64>> {
    for (i, &v) in y.iter().enumerate() {
        if !v.is_finite() || v <= 0.0 || v >= 1.0 {
            return Err(Error::Domain(format!(
                "response {v} at row {i} is not strictly inside (0, 1)"
            )));
        }
    }
    Ok(y.map(|v| (v / (1.0 - v)).ln()))
}

struct Standardized {
    xs: DMatrix<f64>,
    col_mean: Vec<f64>,
    col_sd: Vec<f64>,
    constant: Vec<bool>,
    y_mean: f64,
    yc: DVector<f64>,
}

fn standardize(x: &DMatrix<f64>, ystar: &DVector<f64>) -> Standardized {
    let n = x.nrows();
    let p = x.ncols();
    let nf = n as f64;
    let mut xs = x.clone();
    let mut col_mean = vec![0.0; p];
    let mut col_sd = vec![0.0; p];
    let mut constant = vec![false; p];
    for j in 0..p {
        let col = x.column(j);
        let mean = col.sum() / nf;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        let sd = var.sqrt();
        col_mean[j] = mean;
        col_sd[j] = sd;
        if sd < CONSTANT_SD {
            constant[j] = true;
            xs.column_mut(j).fill(0.0);
        } else {
            for i in 0..n {
                xs[(i, j)] = (x[(i, j)] - mean) / sd;
            }
        }
    }
    let y_mean = ystar.sum() / nf;
    let yc = ystar.map(|v| v - y_mean);
    Standardized {
        xs,
        col_mean,
        col_sd,
        constant,
        y_mean,
        yc,
    }
}

#[inline]
fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// Cyclic coordinate descent at a fixed penalty, warm-started from `beta`.
/// `residual` must equal `yc - Xs beta` on entry and is kept consistent.
fn coordinate_descent(
    xs: &DMatrix<f64>,
    constant: &[bool],
    lambda: f64,
    beta: &mut DVector<f64>,
    residual: &mut DVector<f64>,
) {
    let n = xs.nrows() as f64;
    for _ in 0..CD_MAX_SWEEPS {
        let mut max_step = 0.0_f64;
        for j in 0..xs.ncols() {
            if constant[j] {
                continue;
            }
            let xj = xs.column(j);
            let rho = beta[j] + xj.dot(residual) / n;
            let updated = soft_threshold(rho, lambda);
            let delta = updated - beta[j];
            if delta != 0.0 {
                residual.axpy(-delta, &xj, 1.0);
                beta[j] = updated;
                max_step = max_step.max(delta.abs());
            }
        }
        if max_step < CD_TOL {
            break;
        }
    }
}

/// Smallest penalty that keeps every coefficient at zero on standardized
/// data: `max_j |(1/n) Xs_j' yc|`.
pub fn lasso_lambda_max(x: &DMatrix<f64>, ystar: &DVector<f64>) -> Result<f64> {
    check_inputs(x, ystar)?;
    let s = standardize(x, ystar);
    Ok(max_abs_covariance(&s))
}

fn max_abs_covariance(s: &Standardized) -> f64 {
    let n = s.xs.nrows() as f64;
    (0..s.xs.ncols())
        .filter(|&j| !s.constant[j])
        .map(|j| (s.xs.column(j).dot(&s.yc) / n).abs())
        .fold(0.0, f64::max)
}

fn check_inputs(x: &DMatrix<f64>, ystar: &DVector<f64>) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Parameter("empty design matrix".into()));
    }
    if ystar.len() != x.nrows() {
        return Err(Error::Parameter(format!(
            "response length {} does not match {} rows",
            ystar.len(),
            x.nrows()
        )));
    }
    if ystar.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("inputs must be finite".into()));
    }
    Ok(())
}

fn descending_grid(lambda_max: f64, grid_size: usize) -> Vec<f64> {
    let ratio = GRID_FLOOR_RATIO.powf(1.0 / (grid_size - 1) as f64);
    let mut grid = Vec::with_capacity(grid_size);
    let mut lambda = lambda_max;
    for _ in 0..grid_size {
        grid.push(lambda);
        lambda *= ratio;
    }
    grid
}

/// Solve the path on standardized data, invoking `visit(g, beta)` at each
/// grid point.
fn solve_path<F: FnMut(usize, &DVector<f64>)>(
    s: &Standardized,
    grid: &[f64],
    mut visit: F,
) {
    let p = s.xs.ncols();
    let mut beta = DVector::zeros(p);
    let mut residual = s.yc.clone();
    for (g, &lambda) in grid.iter().enumerate() {
        coordinate_descent(&s.xs, &s.constant, lambda, &mut beta, &mut residual);
        visit(g, &beta);
    }
}

fn destandardize(s: &Standardized, beta_std: &DVector<f64>) -> (Vec<f64>, f64) {
    let p = beta_std.len();
    let mut coefficients = vec![0.0; p];
    let mut intercept = s.y_mean;
    for j in 0..p {
        if !s.constant[j] && beta_std[j] != 0.0 {
            let c = beta_std[j] / s.col_sd[j];
            coefficients[j] = c;
            intercept -= c * s.col_mean[j];
        }
    }
    (coefficients, intercept)
}

/// Fit the full path with 10-fold cross-validation and refit at the
/// CV-minimizing penalty. The `rng` drives the deterministic fold shuffle.
pub fn fit_lasso_path<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    ystar: &DVector<f64>,
    grid_size: usize,
    rng: &mut R,
) -> Result<LassoFit> {
    check_inputs(x, ystar)?;
    let n = x.nrows();
    if n < CV_FOLDS {
        return Err(Error::Parameter(format!(
            "{CV_FOLDS}-fold cross-validation needs at least {CV_FOLDS} observations, got {n}"
        )));
    }
    if grid_size < 2 {
        return Err(Error::Parameter("penalty grid needs at least 2 points".into()));
    }

    let full = standardize(x, ystar);
    let lambda_max = max_abs_covariance(&full);
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(Error::State(
            "lasso path undefined: response is uncorrelated with every predictor".into(),
        ));
    }
    let grid = descending_grid(lambda_max, grid_size);

    // Balanced folds from a seeded shuffle.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let fold_of: Vec<usize> = {
        let mut f = vec![0usize; n];
        for (pos, &row) in order.iter().enumerate() {
            f[row] = pos % CV_FOLDS;
        }
        f
    };

    let mut cv_sq_error = vec![0.0; grid.len()];
    for fold in 0..CV_FOLDS {
        let train_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        let xt = DMatrix::from_fn(train_rows.len(), x.ncols(), |i, j| x[(train_rows[i], j)]);
        let yt = DVector::from_fn(train_rows.len(), |i, _| ystar[train_rows[i]]);
        let st = standardize(&xt, &yt);
        solve_path(&st, &grid, |g, beta_std| {
            let (coef, intercept) = destandardize(&st, beta_std);
            for &row in &test_rows {
                let mut pred = intercept;
                for j in 0..x.ncols() {
                    pred += coef[j] * x[(row, j)];
                }
                let e = ystar[row] - pred;
                cv_sq_error[g] += e * e;
            }
        });
    }
    let cv_mean_error: Vec<f64> = cv_sq_error.iter().map(|e| e / n as f64).collect();

    // Ties break toward the larger (earlier) penalty.
    let best = cv_mean_error
        .iter()
        .enumerate()
        .fold(0usize, |best, (g, &e)| if e < cv_mean_error[best] { g } else { best });
    let lambda_selected = grid[best];

    let mut final_beta = DVector::zeros(x.ncols());
    solve_path(&full, &grid[..=best], |g, beta_std| {
        if g == best {
            final_beta.copy_from(beta_std);
        }
    });
    let (coefficients, intercept) = destandardize(&full, &final_beta);
    let constant_columns = (0..x.ncols()).filter(|&j| full.constant[j]).collect();

    Ok(LassoFit {
        coefficients,
        intercept,
        lambda_grid: grid,
        cv_mean_error,
        lambda_selected,
        constant_columns,
    })
}

/// Single fit at a fixed standardized-scale penalty (no cross-validation).
pub fn fit_lasso_at(
    x: &DMatrix<f64>,
    ystar: &DVector<f64>,
    lambda: f64,
) -> Result<(Vec<f64>, f64)> {
    check_inputs(x, ystar)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Parameter(format!("penalty must be >= 0, got {lambda}")));
    }
    let s = standardize(x, ystar);
    let mut beta = DVector::zeros(x.ncols());
    let mut residual = s.yc.clone();
    coordinate_descent(&s.xs, &s.constant, lambda, &mut beta, &mut residual);
    Ok(destandardize(&s, &beta))
}

/// Selection rule of the comparator: a variable is selected iff its
/// coefficient is nonzero.
pub fn lasso_selected(fit: &LassoFit) -> Vec<bool> {
    fit.coefficients.iter().map(|&c| c != 0.0).collect()
}

/// Predict responses on the (0,1) scale: inv-logit of the linear predictor.
pub fn predict_mean(fit: &LassoFit, x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            let mut eta = fit.intercept;
            for j in 0..x.ncols().min(fit.coefficients.len()) {
                eta += fit.coefficients[j] * x[(i, j)];
            }
            inv_logit(eta)
        })
        .collect()
}
