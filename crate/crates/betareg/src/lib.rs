//! Sparse Bayesian Beta regression for bounded responses.
//!
//! The model is `y_i ~ Beta(mu_i phi, (1 - mu_i) phi)` with
//! `mu_i = logit^{-1}(x_i' beta)` and known precision `phi`. Inference
//! targets a tempered posterior (likelihood raised to `alpha <= 1`) under a
//! Horseshoe prior on `beta`, sampled by a six-step Gibbs scheme built on
//! Polya-Gamma data augmentation. A transformed-response Lasso serves as
//! the comparator, and a simulation harness reproduces the estimation,
//! prediction and variable-selection benchmarks at desk scale.
//!
//! Modules map the moving parts: [`pg`] (Polya-Gamma variates), [`model`]
//! (types, likelihood, summaries), [`gibbs`] (the sampler), [`lasso`]
//! (the baseline), [`simgen`] (scenario generation), [`metrics`],
//! [`diagnostics`] (ACF/ESS/trace export), [`study`] (replication engine)
//! and [`cli`] (the `betareg` binary).

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod gibbs;
pub mod io;
pub mod lasso;
pub mod metrics;
pub mod model;
pub mod pg;
pub mod rng;
pub mod simgen;
pub mod study;

pub use error::{Error, Result};
