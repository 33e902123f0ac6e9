//! MCMC health reporting: autocorrelation, effective sample size, and tidy
//! trace/ACF exports for external plotting.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{format_float, write_text};
use crate::model::PosteriorDraws;

/// Sample autocorrelation up to `max_lag`, biased (1/N) covariance
/// convention; `acf[0] = 1`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if series.len() <= max_lag {
        return Err(Error::Parameter(format!(
            "series length {} must exceed max_lag {}",
            series.len(),
            max_lag
        )));
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::State("series is constant; autocorrelation undefined".into()));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for lag in 1..=max_lag {
        let cov = (0..n - lag)
            .map(|i| (series[i] - mean) * (series[i + lag] - mean))
            .sum::<f64>()
            / n as f64;
        out.push(cov / var);
    }
    Ok(out)
}

/// Effective sample size `N / (1 + 2 sum_k rho_k)` with the autocorrelation
/// sum truncated at the first non-positive term.
pub fn ess(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Parameter("series too short for ESS".into()));
    }
    let rho = acf(series, n - 1)?;
    let mut acc = 0.0;
    for &r in &rho[1..] {
        if r <= 0.0 {
            break;
        }
        acc += r;
    }
    Ok(n as f64 / (1.0 + 2.0 * acc))
}

/// Write kept draws of the requested coordinates as a tidy CSV
/// (iteration, coordinate, value), one row per draw per coordinate.
pub fn export_traces(
    draws: &PosteriorDraws,
    coordinates: &[usize],
    path: impl AsRef<Path>,
) -> Result<()> {
    let p = draws.p();
    if let Some(&bad) = coordinates.iter().find(|&&c| c >= p) {
        return Err(Error::Parameter(format!(
            "coordinate {bad} out of range (p = {p})"
        )));
    }
    let mut text = String::from("iteration,coordinate,value\n");
    for &c in coordinates {
        for row in 0..draws.n_kept() {
            text.push_str(&format!(
                "{},{},{}\n",
                row,
                c,
                format_float(draws.beta_draws[(row, c)])
            ));
        }
    }
    write_text(path, &text)
}

/// Write per-coordinate ACF tables as a tidy CSV (coordinate, lag, acf).
pub fn export_acf(
    draws: &PosteriorDraws,
    coordinates: &[usize],
    max_lag: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let p = draws.p();
    if let Some(&bad) = coordinates.iter().find(|&&c| c >= p) {
        return Err(Error::Parameter(format!(
            "coordinate {bad} out of range (p = {p})"
        )));
    }
    let mut text = String::from("coordinate,lag,acf\n");
    for &c in coordinates {
        let series: Vec<f64> = draws.beta_draws.column(c).iter().copied().collect();
        let rho = acf(&series, max_lag)?;
        for (lag, &r) in rho.iter().enumerate() {
            text.push_str(&format!("{},{},{}\n", c, lag, format_float(r)));
        }
    }
    write_text(path, &text)
}
