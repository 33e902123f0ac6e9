//! Synthetic scenario generation: Gaussian designs with AR-structured
//! correlation, sparse +-1 coefficient vectors, and Beta-distributed
//! responses, split into train and test sets on disjoint random substreams.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{inv_logit, Dataset, RESPONSE_GUARD};
use crate::rng::{derive_rng, stream};

/// One simulation design: dimensions, sparsity, design correlation, true
/// precision, test size and base seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub n: usize,
    pub p: usize,
    pub s_star: usize,
    pub rho_x: f64,
    pub phi_true: f64,
    pub n_test: usize,
    pub seed: u64,
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n == 0 || self.p == 0 {
            problems.push("n and p must be positive".into());
        }
        if self.s_star > self.p {
            problems.push(format!("s_star ({}) must not exceed p ({})", self.s_star, self.p));
        }
        if !(self.rho_x >= 0.0 && self.rho_x < 1.0) {
            problems.push(format!("rho_x must lie in [0, 1), got {}", self.rho_x));
        }
        if !(self.phi_true.is_finite() && self.phi_true > 0.0) {
            problems.push(format!("phi_true must be positive, got {}", self.phi_true));
        }
        if self.n_test == 0 {
            problems.push("n_test must be at least 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// Everything one replication consumes: train split, test split, truth.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub x_test: DMatrix<f64>,
    pub y_test: DVector<f64>,
    pub beta0: DVector<f64>,
}

/// Draw `rows` design rows i.i.d. N(0, Sigma) with `Sigma_ij = rho^{|i-j|}`.
///
/// The AR recursion `x_1 = z_1`, `x_j = rho x_{j-1} + sqrt(1-rho^2) z_j`
/// applies exactly the (banded) Cholesky factor of Sigma, and reduces to
/// the identity at rho = 0.
pub fn gen_design_rows<R: Rng + ?Sized>(
    rows: usize,
    p: usize,
    rho_x: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if !(rho_x >= 0.0 && rho_x < 1.0) {
        return Err(Error::Parameter(format!(
            "rho_x must lie in [0, 1), got {rho_x}"
        )));
    }
    let innovation = (1.0 - rho_x * rho_x).sqrt();
    let mut x = DMatrix::zeros(rows, p);
    for i in 0..rows {
        let mut prev = 0.0;
        for j in 0..p {
            let z: f64 = StandardNormal.sample(rng);
            let v = if j == 0 { z } else { rho_x * prev + innovation * z };
            x[(i, j)] = v;
            prev = v;
        }
    }
    Ok(x)
}

/// Train-sized design for the scenario.
pub fn gen_design<R: Rng + ?Sized>(scenario: &SimScenario, rng: &mut R) -> Result<DMatrix<f64>> {
    scenario.validate()?;
    gen_design_rows(scenario.n, scenario.p, scenario.rho_x, rng)
}

/// Sparse truth: the first ceil(s*/2) entries are +1, the next
/// floor(s*/2) are -1, the remaining p - s* are exactly 0.
pub fn gen_beta0(p: usize, s_star: usize) -> Result<DVector<f64>> {
    if s_star > p {
        return Err(Error::Parameter(format!(
            "s_star ({s_star}) must not exceed p ({p})"
        )));
    }
    let positives = s_star.div_ceil(2);
    Ok(DVector::from_fn(p, |j, _| {
        if j < positives {
            1.0
        } else if j < s_star {
            -1.0
        } else {
            0.0
        }
    }))
}

/// Responses `y_i ~ Beta(mu_i phi, (1 - mu_i) phi)` with
/// `mu_i = inv_logit(x_i' beta0)`, drawn by the two-gamma-ratio
/// construction and clamped away from the floating-point boundaries.
pub fn gen_response<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    beta0: &DVector<f64>,
    phi: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if !(phi.is_finite() && phi > 0.0) {
        return Err(Error::Parameter(format!("phi must be positive, got {phi}")));
    }
    if beta0.len() != x.ncols() {
        return Err(Error::Parameter(format!(
            "beta0 length {} does not match p = {}",
            beta0.len(),
            x.ncols()
        )));
    }
    let eta = x * beta0;
    let mut y = DVector::zeros(x.nrows());
    for i in 0..x.nrows() {
        let mu = inv_logit(eta[i]).clamp(RESPONSE_GUARD, 1.0 - RESPONSE_GUARD);
        let g1 = Gamma::new(mu * phi, 1.0)
            .map_err(|e| Error::Parameter(format!("gamma shape {}: {e}", mu * phi)))?
            .sample(rng);
        let g2 = Gamma::new((1.0 - mu) * phi, 1.0)
            .map_err(|e| Error::Parameter(format!("gamma shape {}: {e}", (1.0 - mu) * phi)))?
            .sample(rng);
        let draw = if g1 + g2 > 0.0 { g1 / (g1 + g2) } else { 0.5 };
        y[i] = draw.clamp(RESPONSE_GUARD, 1.0 - RESPONSE_GUARD);
    }
    Ok(y)
}

/// Materialize a full scenario. Train and test splits use disjoint
/// substreams of `scenario.seed`, so regeneration is bit-identical and the
/// splits are independent.
pub fn gen_scenario_data(scenario: &SimScenario) -> Result<ScenarioData> {
    scenario.validate()?;
    let beta0 = gen_beta0(scenario.p, scenario.s_star)?;

    let mut rng = derive_rng(scenario.seed, &[stream::TRAIN_DESIGN]);
    let x = gen_design_rows(scenario.n, scenario.p, scenario.rho_x, &mut rng)?;
    let mut rng = derive_rng(scenario.seed, &[stream::TRAIN_RESPONSE]);
    let y = gen_response(&x, &beta0, scenario.phi_true, &mut rng)?;

    let mut rng = derive_rng(scenario.seed, &[stream::TEST_DESIGN]);
    let x_test = gen_design_rows(scenario.n_test, scenario.p, scenario.rho_x, &mut rng)?;
    let mut rng = derive_rng(scenario.seed, &[stream::TEST_RESPONSE]);
    let y_test = gen_response(&x_test, &beta0, scenario.phi_true, &mut rng)?;

    Ok(ScenarioData {
        x,
        y,
        x_test,
        y_test,
        beta0,
    })
}

impl ScenarioData {
    pub fn train_dataset(&self) -> Result<Dataset> {
        Dataset::new(self.x.clone(), self.y.clone())
    }
}
