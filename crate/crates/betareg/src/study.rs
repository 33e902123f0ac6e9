//! Simulation-study harness: scenario x replication grids, fitting both the
//! Horseshoe sampler and the transformed-response Lasso, and aggregating
//! per-replication metrics into mean/sd tables.
//!
//! Replications are independent, each seeded from (scenario seed,
//! replication index), so results do not depend on scheduling. With the
//! `parallel` feature (default) replications run on the rayon pool;
//! [`run_study_sequential`] always runs them on the calling thread and
//! produces identical output.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::run_chain_keeping;
use crate::lasso::{fit_lasso_path, lasso_selected, transform_response, LassoFit};
use crate::metrics::{estimation_errors, selection_metrics, MetricsReport};
use crate::model::{summarize, Dataset, FitConfig, PosteriorDraws, PosteriorSummary};
use crate::rng::{derive_rng, mix, stream};
use crate::simgen::{gen_scenario_data, SimScenario};

pub const DEFAULT_LASSO_GRID: usize = 100;
pub const DEFAULT_CREDIBLE_LEVEL: f64 = 0.95;

/// Sampler settings shared across a study (phi comes from each scenario).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitSettings {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default = "default_level")]
    pub credible_level: f64,
}

fn default_alpha() -> f64 {
    0.99
}
fn default_iterations() -> usize {
    1200
}
fn default_burn_in() -> usize {
    200
}
fn default_chains() -> usize {
    1
}
fn default_level() -> f64 {
    DEFAULT_CREDIBLE_LEVEL
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            iterations: default_iterations(),
            burn_in: default_burn_in(),
            chains: default_chains(),
            credible_level: default_level(),
        }
    }
}

/// One study entry: a data-generating scenario, optionally fit with a
/// precision different from the true one (misspecification sweeps).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyScenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub scenario: SimScenario,
    /// Precision used by the sampler; defaults to the true phi.
    #[serde(default)]
    pub fit_phi: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenarios: Vec<StudyScenario>,
    #[serde(default)]
    pub fit: FitSettings,
    #[serde(default = "default_grid")]
    pub lasso_grid_size: usize,
}

fn default_grid() -> usize {
    DEFAULT_LASSO_GRID
}

/// A fitted Horseshoe model: pooled summary plus the per-chain draws.
#[derive(Debug, Clone)]
pub struct HorseshoeFit {
    pub summary: PosteriorSummary,
    pub chains: Vec<PosteriorDraws>,
}

/// Run `config.chains` Gibbs chains on derived streams and summarize the
/// pooled post-burn-in draws.
pub fn fit_horseshoe(
    dataset: &Dataset,
    config: &FitConfig,
    credible_level: f64,
    keep_lambda2: bool,
) -> Result<HorseshoeFit> {
    config.validate()?;
    let mut chains = Vec::with_capacity(config.chains);
    for c in 0..config.chains {
        let mut rng = derive_rng(config.seed, &[stream::CHAIN, c as u64]);
        chains.push(run_chain_keeping(dataset, config, keep_lambda2, &mut rng)?);
    }
    let pooled = PosteriorDraws::pooled(&chains)?;
    let summary = summarize(&pooled, credible_level)?;
    Ok(HorseshoeFit { summary, chains })
}

/// Metrics of both methods on one simulated replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicationMetrics {
    pub replication: usize,
    pub horseshoe: MetricsReport,
    pub lasso: MetricsReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub replication: usize,
    pub message: String,
}

/// Mean and standard deviation over replications; missing values are
/// excluded, and sd is reported only when at least two values survive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub count: usize,
}

pub fn mean_sd(values: &[Option<f64>]) -> MeanSd {
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    let count = kept.len();
    if count == 0 {
        return MeanSd {
            mean: None,
            sd: None,
            count,
        };
    }
    let mean = kept.iter().sum::<f64>() / count as f64;
    let sd = (count >= 2).then(|| {
        (kept.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64).sqrt()
    });
    MeanSd {
        mean: Some(mean),
        sd,
        count,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsAggregate {
    pub l2_beta: MeanSd,
    pub l2_linpred: MeanSd,
    pub l2_y: MeanSd,
    pub l2_ytest: MeanSd,
    pub precision: MeanSd,
    pub recall: MeanSd,
    pub f1: MeanSd,
    pub specificity: MeanSd,
    pub fdr: MeanSd,
}

fn aggregate<'a>(reports: impl Iterator<Item = &'a MetricsReport> + Clone) -> MetricsAggregate {
    let collect = |f: &dyn Fn(&MetricsReport) -> Option<f64>| -> MeanSd {
        let vals: Vec<Option<f64>> = reports.clone().map(f).collect();
        mean_sd(&vals)
    };
    MetricsAggregate {
        l2_beta: collect(&|r| Some(r.estimation.l2_beta)),
        l2_linpred: collect(&|r| Some(r.estimation.l2_linpred)),
        l2_y: collect(&|r| Some(r.estimation.l2_y)),
        l2_ytest: collect(&|r| Some(r.estimation.l2_ytest)),
        precision: collect(&|r| r.selection.precision),
        recall: collect(&|r| r.selection.recall),
        f1: collect(&|r| r.selection.f1),
        specificity: collect(&|r| r.selection.specificity),
        fdr: collect(&|r| r.selection.fdr),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: Option<String>,
    pub scenario: SimScenario,
    pub fit_phi: f64,
    pub replications: Vec<ReplicationMetrics>,
    pub failures: Vec<ReplicationFailure>,
    pub horseshoe: MetricsAggregate,
    pub lasso: MetricsAggregate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub requested_replications: usize,
    pub fit: FitSettings,
    pub lasso_grid_size: usize,
    pub scenarios: Vec<ScenarioReport>,
}

/// Run one replication end to end: generate data, fit both methods,
/// compute metrics against the truth.
pub fn run_replication(
    entry: &StudyScenario,
    fit: &FitSettings,
    lasso_grid_size: usize,
    replication: usize,
) -> Result<ReplicationMetrics> {
    let rep_seed = mix(entry.scenario.seed, mix(stream::REPLICATION, replication as u64));
    let scenario = SimScenario {
        seed: rep_seed,
        ..entry.scenario
    };
    let data = gen_scenario_data(&scenario)?;
    let dataset = data.train_dataset()?;

    let fit_config = FitConfig {
        phi: entry.fit_phi.unwrap_or(entry.scenario.phi_true),
        alpha: fit.alpha,
        iterations: fit.iterations,
        burn_in: fit.burn_in,
        seed: rep_seed,
        chains: fit.chains,
    };
    let hs = fit_horseshoe(&dataset, &fit_config, fit.credible_level, false)?;
    let beta_hat = DVector::from_column_slice(&hs.summary.mean);
    let horseshoe = MetricsReport::combine(
        estimation_errors(&beta_hat, &data.beta0, &data.x, &data.x_test, &data.y, &data.y_test)?,
        selection_metrics(&hs.summary.selected, &data.beta0)?,
    );

    let lasso_fit = fit_lasso(&data.x, &data.y, lasso_grid_size, rep_seed)?;
    let lasso_beta = DVector::from_column_slice(&lasso_fit.coefficients);
    let lasso = MetricsReport::combine(
        estimation_errors(&lasso_beta, &data.beta0, &data.x, &data.x_test, &data.y, &data.y_test)?,
        selection_metrics(&lasso_selected(&lasso_fit), &data.beta0)?,
    );

    Ok(ReplicationMetrics {
        replication,
        horseshoe,
        lasso,
    })
}

fn fit_lasso(
    x: &nalgebra::DMatrix<f64>,
    y: &DVector<f64>,
    grid_size: usize,
    rep_seed: u64,
) -> Result<LassoFit> {
    let ystar = transform_response(y)?;
    let mut fold_rng = derive_rng(rep_seed, &[stream::LASSO_FOLDS]);
    fit_lasso_path(x, &ystar, grid_size, &mut fold_rng)
}

fn map_replications(
    entry: &StudyScenario,
    fit: &FitSettings,
    lasso_grid_size: usize,
    replications: usize,
    parallel: bool,
) -> Vec<Result<ReplicationMetrics>> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..replications)
            .into_par_iter()
            .map(|r| run_replication(entry, fit, lasso_grid_size, r))
            .collect();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    (0..replications)
        .map(|r| run_replication(entry, fit, lasso_grid_size, r))
        .collect()
}

fn run_study_with(config: &StudyConfig, replications: usize, parallel: bool) -> Result<StudyReport> {
    if replications == 0 {
        return Err(Error::Parameter("replications must be positive".into()));
    }
    if config.scenarios.is_empty() {
        return Err(Error::Validation(vec!["scenario list is empty".into()]));
    }
    for entry in &config.scenarios {
        entry.scenario.validate()?;
        if let Some(phi) = entry.fit_phi {
            if !(phi.is_finite() && phi > 0.0) {
                return Err(Error::Validation(vec![format!(
                    "fit_phi must be positive, got {phi}"
                )]));
            }
        }
    }

    let mut scenarios = Vec::with_capacity(config.scenarios.len());
    for entry in &config.scenarios {
        let outcomes = map_replications(
            entry,
            &config.fit,
            config.lasso_grid_size,
            replications,
            parallel,
        );
        let mut reps = Vec::new();
        let mut failures = Vec::new();
        for (r, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(m) => reps.push(m),
                Err(e) => failures.push(ReplicationFailure {
                    replication: r,
                    message: e.to_string(),
                }),
            }
        }
        let horseshoe = aggregate(reps.iter().map(|r| &r.horseshoe));
        let lasso = aggregate(reps.iter().map(|r| &r.lasso));
        scenarios.push(ScenarioReport {
            name: entry.name.clone(),
            scenario: entry.scenario,
            fit_phi: entry.fit_phi.unwrap_or(entry.scenario.phi_true),
            replications: reps,
            failures,
            horseshoe,
            lasso,
        });
    }

    Ok(StudyReport {
        requested_replications: replications,
        fit: config.fit,
        lasso_grid_size: config.lasso_grid_size,
        scenarios,
    })
}

/// Run the full study; replications use the rayon pool when the `parallel`
/// feature is enabled.
pub fn run_study(config: &StudyConfig, replications: usize) -> Result<StudyReport> {
    run_study_with(config, replications, true)
}

/// Run the full study strictly on the calling thread. Output is identical
/// to [`run_study`]; used for benchmarking the parallel speedup and for
/// checking scheduling independence.
pub fn run_study_sequential(config: &StudyConfig, replications: usize) -> Result<StudyReport> {
    run_study_with(config, replications, false)
}
