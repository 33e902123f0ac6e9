//! Core data types, link functions, the Beta log-likelihood, and posterior
//! summaries.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Responses must satisfy `RESPONSE_GUARD <= y <= 1 - RESPONSE_GUARD`.
/// Violations are rejected at ingestion, never clamped during fitting.
pub const RESPONSE_GUARD: f64 = 1e-12;

/// A design matrix with strictly interior bounded responses.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Parameter(
                "design matrix must have at least one row and one column".into(),
            ));
        }
        if y.len() != x.nrows() {
            return Err(Error::Parameter(format!(
                "response length {} does not match {} design rows",
                y.len(),
                x.nrows()
            )));
        }
        if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "design matrix has non-finite entry at flat index {bad}"
            )));
        }
        let violations: Vec<usize> = y
            .iter()
            .enumerate()
            .filter(|(_, &v)| !v.is_finite() || v < RESPONSE_GUARD || v > 1.0 - RESPONSE_GUARD)
            .map(|(i, _)| i)
            .collect();
        if !violations.is_empty() {
            return Err(Error::Domain(format!(
                "responses must lie strictly inside (0, 1); offending rows: {violations:?}"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Prepend a column of ones (opt-in intercept for the CLI).
    pub fn with_intercept_column(&self) -> Self {
        let n = self.n();
        let mut x = DMatrix::zeros(n, self.p() + 1);
        x.column_mut(0).fill(1.0);
        x.view_mut((0, 1), (n, self.p())).copy_from(&self.x);
        Self {
            x,
            y: self.y.clone(),
        }
    }
}

/// Sampler configuration: Beta precision, tempering exponent and run lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub phi: f64,
    pub alpha: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chains: usize,
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.phi.is_finite() && self.phi > 0.0) {
            problems.push(format!("phi must be positive and finite, got {}", self.phi));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            problems.push(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if self.iterations == 0 {
            problems.push("iterations must be positive".into());
        }
        if self.burn_in >= self.iterations {
            problems.push(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            ));
        }
        if self.chains == 0 {
            problems.push("chains must be positive".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn kept(&self) -> usize {
        self.iterations - self.burn_in
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            phi: 10.0,
            alpha: 0.99,
            iterations: 1200,
            burn_in: 200,
            seed: 0,
            chains: 1,
        }
    }
}

/// Current state of one Gibbs chain. Owned by exactly one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub beta: DVector<f64>,
    pub lambda2: DVector<f64>,
    pub nu: DVector<f64>,
    pub tau2: f64,
    pub xi: f64,
    pub omega: DVector<f64>,
}

impl ChainState {
    /// Prior-centered start: beta = 0, all variance components at 1.
    /// omega is overwritten by the first latent-variable step.
    pub fn initial(n: usize, p: usize) -> Self {
        Self {
            beta: DVector::zeros(p),
            lambda2: DVector::from_element(p, 1.0),
            nu: DVector::from_element(p, 1.0),
            tau2: 1.0,
            xi: 1.0,
            omega: DVector::from_element(n, 1.0),
        }
    }
}

/// Post-burn-in draws of one chain (no thinning).
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    /// kept-iterations x p
    pub beta_draws: DMatrix<f64>,
    pub tau2_draws: Vec<f64>,
    pub lambda2_draws: Option<DMatrix<f64>>,
    /// Exact Beta log-likelihood at each kept draw.
    pub log_likelihood_trace: Vec<f64>,
}

impl PosteriorDraws {
    pub fn n_kept(&self) -> usize {
        self.beta_draws.nrows()
    }

    pub fn p(&self) -> usize {
        self.beta_draws.ncols()
    }

    /// Stack kept draws of several chains row-wise (for pooled summaries).
    pub fn pooled(chains: &[PosteriorDraws]) -> Result<PosteriorDraws> {
        let Some(first) = chains.first() else {
            return Err(Error::State("no chains to pool".into()));
        };
        let p = first.p();
        if chains.iter().any(|c| c.p() != p) {
            return Err(Error::State("chains disagree on dimension".into()));
        }
        let total: usize = chains.iter().map(|c| c.n_kept()).sum();
        let mut beta = DMatrix::zeros(total, p);
        let mut tau2 = Vec::with_capacity(total);
        let mut ll = Vec::with_capacity(total);
        let mut row = 0;
        for c in chains {
            beta.view_mut((row, 0), (c.n_kept(), p)).copy_from(&c.beta_draws);
            tau2.extend_from_slice(&c.tau2_draws);
            ll.extend_from_slice(&c.log_likelihood_trace);
            row += c.n_kept();
        }
        Ok(PosteriorDraws {
            beta_draws: beta,
            tau2_draws: tau2,
            lambda2_draws: None,
            log_likelihood_trace: ll,
        })
    }
}

/// Columnwise posterior summary with equal-tailed credible bounds.
///
/// `selected[j]` is true iff the credible interval for coordinate j
/// excludes zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
    pub ci_lower: Vec<f64>,
    pub ci_upper: Vec<f64>,
    pub selected: Vec<bool>,
    pub credible_level: f64,
}

/// logit^{-1}(eta) = 1 / (1 + exp(-eta)); saturates gracefully at extremes.
#[inline]
pub fn inv_logit(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(mu / (1 - mu)) for mu strictly inside (0, 1).
#[inline]
pub fn logit(mu: f64) -> f64 {
    (mu / (1.0 - mu)).ln()
}

/// Exact Beta log-likelihood sum_i log Beta(y_i; mu_i phi, (1 - mu_i) phi)
/// with mu_i = inv_logit(x_i' beta).
///
/// Means are kept a hair inside (0, 1) so extreme linear predictors produce
/// a large-but-finite value instead of hitting the gamma-function poles.
pub fn beta_log_likelihood(dataset: &Dataset, beta: &DVector<f64>, phi: f64) -> Result<f64> {
    if !(phi.is_finite() && phi > 0.0) {
        return Err(Error::Parameter(format!(
            "phi must be positive and finite, got {phi}"
        )));
    }
    if beta.len() != dataset.p() {
        return Err(Error::Parameter(format!(
            "beta length {} does not match p = {}",
            beta.len(),
            dataset.p()
        )));
    }
    let eta = dataset.x() * beta;
    let ln_gamma_phi = ln_gamma(phi);
    let mut total = 0.0;
    for (i, &y) in dataset.y().iter().enumerate() {
        let mu = inv_logit(eta[i]).clamp(RESPONSE_GUARD, 1.0 - RESPONSE_GUARD);
        let a = mu * phi;
        let b = (1.0 - mu) * phi;
        total += ln_gamma_phi - ln_gamma(a) - ln_gamma(b)
            + (a - 1.0) * y.ln()
            + (b - 1.0) * (1.0 - y).ln();
    }
    Ok(total)
}

/// Empirical quantile with linear interpolation between order statistics.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Columnwise posterior mean, median, and equal-tailed credible interval at
/// `credible_level`; a coordinate is selected iff its interval excludes 0.
pub fn summarize(draws: &PosteriorDraws, credible_level: f64) -> Result<PosteriorSummary> {
    if draws.n_kept() == 0 {
        return Err(Error::State("cannot summarize an empty draw matrix".into()));
    }
    if !(credible_level > 0.0 && credible_level < 1.0) {
        return Err(Error::Parameter(format!(
            "credible level must lie in (0, 1), got {credible_level}"
        )));
    }
    let p = draws.p();
    let lo_q = (1.0 - credible_level) / 2.0;
    let hi_q = 1.0 - lo_q;

    let mut mean = Vec::with_capacity(p);
    let mut median = Vec::with_capacity(p);
    let mut ci_lower = Vec::with_capacity(p);
    let mut ci_upper = Vec::with_capacity(p);
    let mut selected = Vec::with_capacity(p);

    for j in 0..p {
        let mut col: Vec<f64> = draws.beta_draws.column(j).iter().copied().collect();
        col.sort_by(|a, b| a.partial_cmp(b).expect("draws must not contain NaN"));
        let m = col.iter().sum::<f64>() / col.len() as f64;
        let med = quantile_sorted(&col, 0.5);
        let lo = quantile_sorted(&col, lo_q);
        let hi = quantile_sorted(&col, hi_q);
        mean.push(m);
        median.push(med);
        ci_lower.push(lo);
        ci_upper.push(hi);
        selected.push(lo > 0.0 || hi < 0.0);
    }

    Ok(PosteriorSummary {
        mean,
        median,
        ci_lower,
        ci_upper,
        selected,
        credible_level,
    })
}

/// Method-of-moments precision estimate from the responses alone:
/// `phi = ybar (1 - ybar) / s^2 - 1`. Optional plumbing for when phi is
/// unknown; not part of the sampler.
pub fn estimate_phi_moments(y: &DVector<f64>) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::Parameter(
            "phi estimation needs at least two responses".into(),
        ));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        return Err(Error::State("responses are constant; phi is unidentified".into()));
    }
    let phi = mean * (1.0 - mean) / var - 1.0;
    if phi <= 0.0 {
        return Err(Error::State(format!(
            "moment estimate of phi is non-positive ({phi:.3}); responses are overdispersed for a Beta model"
        )));
    }
    Ok(phi)
}
