//! The six-step Polya-Gamma / Horseshoe Gibbs sampler for the tempered
//! posterior.
//!
//! One sweep updates, in order:
//!
//! 1. latent `omega_i ~ PG(alpha * phi, eta_i)` with `eta = X beta`,
//! 2. `beta ~ N(m, V)` with `V = (X' Omega X + Lambda^{-1})^{-1}`,
//!    `m = V X' kappa`, `kappa_i = alpha * phi * (y_i - 1/2)` and
//!    `Lambda = diag(lambda_j^2 tau^2)`,
//! 3. `lambda_j^2 ~ InvGamma(1, 1/nu_j + beta_j^2 / (2 tau^2))`,
//! 4. `nu_j ~ InvGamma(1, 1 + 1/lambda_j^2)`,
//! 5. `tau^2 ~ InvGamma((p+1)/2, 1/xi + (1/2) sum_j beta_j^2 / lambda_j^2)`,
//! 6. `xi ~ InvGamma(1, 1 + 1/tau^2)`.
//!
//! The tempering exponent enters only through the latent shape and kappa;
//! at alpha = 1 the sweep is the untempered sampler. The augmented target
//! treats the likelihood in its logistic surrogate form; the exact Beta
//! log-likelihood is recorded alongside each kept draw for transparency.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{beta_log_likelihood, ChainState, Dataset, FitConfig, PosteriorDraws};
use crate::pg::sample_pg_vector;

/// Variance draws are clamped into this range: half-Cauchy tails can emit
/// values that destroy the factorization while lying far outside any
/// credible posterior region.
pub const VARIANCE_FLOOR: f64 = 1e-12;
pub const VARIANCE_CEIL: f64 = 1e12;

const JITTER_START_REL: f64 = 1e-10;
const JITTER_MAX_REL: f64 = 1e-6;

/// Factored Gaussian full conditional for the coefficient block.
#[derive(Debug, Clone)]
pub struct FullConditionalNormal {
    mean: DVector<f64>,
    covariance_factor: DMatrix<f64>,
}

impl FullConditionalNormal {
    pub fn new(mean: DVector<f64>, covariance_factor: DMatrix<f64>) -> Self {
        Self {
            mean,
            covariance_factor,
        }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Triangular factor F with F F' = V.
    pub fn covariance_factor(&self) -> &DMatrix<f64> {
        &self.covariance_factor
    }
}

/// Step 1: draw the latent Polya-Gamma vector at the current linear
/// predictor.
pub fn step_omega<R: Rng + ?Sized>(
    state: &ChainState,
    dataset: &Dataset,
    config: &FitConfig,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let eta = dataset.x() * &state.beta;
    let draws = sample_pg_vector(config.alpha * config.phi, eta.as_slice(), rng)?;
    Ok(DVector::from_vec(draws))
}

/// Step 2 (construction): assemble and factor the Gaussian full conditional.
///
/// The precision `X' Omega X + diag(1 / (lambda_j^2 tau^2))` is formed
/// densely and Cholesky-factored; on failure the diagonal is jittered,
/// escalating tenfold from 1e-10 to 1e-6 times the mean diagonal.
pub fn build_full_conditional(
    dataset: &Dataset,
    omega: &DVector<f64>,
    lambda2: &DVector<f64>,
    tau2: f64,
    alpha: f64,
    phi: f64,
) -> Result<FullConditionalNormal> {
    let n = dataset.n();
    let p = dataset.p();
    if omega.len() != n || lambda2.len() != p {
        return Err(Error::Parameter(format!(
            "dimension mismatch: omega {} vs n {}, lambda2 {} vs p {}",
            omega.len(),
            n,
            lambda2.len(),
            p
        )));
    }
    if omega.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::State("omega must be non-negative and finite".into()));
    }
    if tau2 <= 0.0 || lambda2.iter().any(|&l| l <= 0.0) {
        return Err(Error::State("variance components must be positive".into()));
    }

    let x = dataset.x();
    let mut weighted = x.clone();
    for (i, mut row) in weighted.row_iter_mut().enumerate() {
        row *= omega[i];
    }
    let mut precision = x.transpose() * weighted;
    for j in 0..p {
        precision[(j, j)] += 1.0 / (lambda2[j] * tau2);
    }

    let mean_diag = precision.diagonal().mean();
    let chol = factor_with_jitter(&mut precision, mean_diag)?;

    let kappa = DVector::from_fn(n, |i, _| alpha * phi * (dataset.y()[i] - 0.5));
    let rhs = x.transpose() * kappa;
    let mean = chol.solve(&rhs);

    // V = P^{-1} = L^{-T} L^{-1}, so L^{-T} is a (right-)triangular factor
    // of the covariance.
    let l = chol.l();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(p, p))
        .expect("Cholesky factor has positive diagonal");
    let covariance_factor = l_inv.transpose();

    Ok(FullConditionalNormal {
        mean,
        covariance_factor,
    })
}

fn factor_with_jitter(precision: &mut DMatrix<f64>, mean_diag: f64) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(chol) = Cholesky::new(precision.clone()) {
        return Ok(chol);
    }
    let mut jitter = JITTER_START_REL * mean_diag;
    let mut attempts = 1;
    let mut applied = 0.0;
    while jitter <= JITTER_MAX_REL * mean_diag * (1.0 + 1e-12) {
        let delta = jitter - applied;
        for j in 0..precision.nrows() {
            precision[(j, j)] += delta;
        }
        applied = jitter;
        attempts += 1;
        if let Some(chol) = Cholesky::new(precision.clone()) {
            return Ok(chol);
        }
        jitter *= 10.0;
    }
    Err(Error::Factorization {
        attempts,
        max_jitter: applied,
    })
}

/// Step 2 (draw): `m + F z` with standard normal z is an exact N(m, V) draw.
pub fn step_beta<R: Rng + ?Sized>(fc: &FullConditionalNormal, rng: &mut R) -> DVector<f64> {
    let p = fc.mean.len();
    let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
    &fc.mean + &fc.covariance_factor * z
}

/// Inverse-gamma draw with density proportional to
/// `x^{-shape-1} exp(-scale / x)`, via the reciprocal of a gamma variate.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    if !(shape.is_finite() && shape > 0.0) || !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Parameter(format!(
            "inverse-gamma needs positive finite shape and scale, got ({shape}, {scale})"
        )));
    }
    let gamma = Gamma::new(shape, 1.0 / scale)
        .map_err(|e| Error::Parameter(format!("gamma construction failed: {e}")))?;
    loop {
        let g = gamma.sample(rng);
        let x = 1.0 / g;
        if x.is_finite() && x > 0.0 {
            return Ok(x);
        }
    }
}

pub(crate) fn lambda2_conditional_scale(beta_j: f64, tau2: f64, nu_j: f64) -> f64 {
    1.0 / nu_j + beta_j * beta_j / (2.0 * tau2)
}

pub(crate) fn tau2_conditional(beta: &DVector<f64>, lambda2: &DVector<f64>, xi: f64) -> (f64, f64) {
    let p = beta.len() as f64;
    let quad = beta
        .iter()
        .zip(lambda2.iter())
        .map(|(&b, &l)| b * b / l)
        .sum::<f64>();
    ((p + 1.0) / 2.0, 1.0 / xi + 0.5 * quad)
}

/// Step 3: local shrinkage variances.
pub fn step_lambda2<R: Rng + ?Sized>(
    beta: &DVector<f64>,
    tau2: f64,
    nu: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if tau2 <= 0.0 {
        return Err(Error::State(format!("tau2 must be positive, got {tau2}")));
    }
    if nu.iter().any(|&v| v <= 0.0) {
        return Err(Error::State("nu must be positive".into()));
    }
    let mut out = DVector::zeros(beta.len());
    for j in 0..beta.len() {
        let scale = lambda2_conditional_scale(beta[j], tau2, nu[j]);
        out[j] = sample_inverse_gamma(1.0, scale, rng)?.clamp(VARIANCE_FLOOR, VARIANCE_CEIL);
    }
    Ok(out)
}

/// Step 4: local hyperparameters.
pub fn step_nu<R: Rng + ?Sized>(lambda2: &DVector<f64>, rng: &mut R) -> Result<DVector<f64>> {
    if lambda2.iter().any(|&v| v <= 0.0) {
        return Err(Error::State("lambda2 must be positive".into()));
    }
    let mut out = DVector::zeros(lambda2.len());
    for j in 0..lambda2.len() {
        out[j] = sample_inverse_gamma(1.0, 1.0 + 1.0 / lambda2[j], rng)?;
    }
    Ok(out)
}

/// Step 5: global shrinkage variance.
pub fn step_tau2<R: Rng + ?Sized>(
    beta: &DVector<f64>,
    lambda2: &DVector<f64>,
    xi: f64,
    rng: &mut R,
) -> Result<f64> {
    if xi <= 0.0 {
        return Err(Error::State(format!("xi must be positive, got {xi}")));
    }
    if lambda2.iter().any(|&v| v <= 0.0) {
        return Err(Error::State("lambda2 must be positive".into()));
    }
    let (shape, scale) = tau2_conditional(beta, lambda2, xi);
    Ok(sample_inverse_gamma(shape, scale, rng)?.clamp(VARIANCE_FLOOR, VARIANCE_CEIL))
}

/// Step 6: global hyperparameter.
pub fn step_xi<R: Rng + ?Sized>(tau2: f64, rng: &mut R) -> Result<f64> {
    if tau2 <= 0.0 {
        return Err(Error::State(format!("tau2 must be positive, got {tau2}")));
    }
    sample_inverse_gamma(1.0, 1.0 + 1.0 / tau2, rng)
}

/// Advance the chain by one full sweep (steps 1-6, in order).
pub fn sweep<R: Rng + ?Sized>(
    state: &mut ChainState,
    dataset: &Dataset,
    config: &FitConfig,
    rng: &mut R,
) -> Result<()> {
    state.omega = step_omega(state, dataset, config, rng)?;
    let fc = build_full_conditional(
        dataset,
        &state.omega,
        &state.lambda2,
        state.tau2,
        config.alpha,
        config.phi,
    )?;
    state.beta = step_beta(&fc, rng);
    state.lambda2 = step_lambda2(&state.beta, state.tau2, &state.nu, rng)?;
    state.nu = step_nu(&state.lambda2, rng)?;
    state.tau2 = step_tau2(&state.beta, &state.lambda2, state.xi, rng)?;
    state.xi = step_xi(state.tau2, rng)?;
    Ok(())
}

/// Run one chain and record post-burn-in draws (no thinning).
pub fn run_chain<R: Rng + ?Sized>(
    dataset: &Dataset,
    config: &FitConfig,
    rng: &mut R,
) -> Result<PosteriorDraws> {
    run_chain_keeping(dataset, config, false, rng)
}

/// As [`run_chain`], optionally retaining the local-variance draws.
pub fn run_chain_keeping<R: Rng + ?Sized>(
    dataset: &Dataset,
    config: &FitConfig,
    keep_lambda2: bool,
    rng: &mut R,
) -> Result<PosteriorDraws> {
    config.validate()?;
    let n = dataset.n();
    let p = dataset.p();
    let kept = config.kept();

    let mut state = ChainState::initial(n, p);
    let mut beta_draws = DMatrix::zeros(kept, p);
    let mut tau2_draws = Vec::with_capacity(kept);
    let mut lambda2_draws = keep_lambda2.then(|| DMatrix::zeros(kept, p));
    let mut log_likelihood_trace = Vec::with_capacity(kept);

    for iter in 0..config.iterations {
        sweep(&mut state, dataset, config, rng).map_err(|e| Error::ChainFailure {
            iteration: iter,
            snapshot: Box::new(state.clone()),
            source: Box::new(e),
        })?;
        if iter >= config.burn_in {
            let row = iter - config.burn_in;
            beta_draws.row_mut(row).copy_from(&state.beta.transpose());
            tau2_draws.push(state.tau2);
            if let Some(l2) = lambda2_draws.as_mut() {
                l2.row_mut(row).copy_from(&state.lambda2.transpose());
            }
            log_likelihood_trace.push(beta_log_likelihood(dataset, &state.beta, config.phi)?);
        }
    }

    Ok(PosteriorDraws {
        beta_draws,
        tau2_draws,
        lambda2_draws,
        log_likelihood_trace,
    })
}
