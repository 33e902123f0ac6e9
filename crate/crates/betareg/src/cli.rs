//! Command-line entry points: data simulation, fitting, benchmarking, and
//! MCMC diagnostics export.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure,
//! 4 I/O error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{ess, export_acf, export_traces};
use crate::error::{Error, Result};
use crate::io::{
    read_json, read_matrix_csv, read_vector_csv, write_json, write_matrix_csv, write_vector_csv,
};
use crate::metrics::MetricsReport;
use crate::model::{estimate_phi_moments, Dataset, FitConfig, PosteriorDraws, PosteriorSummary};
use crate::simgen::{gen_scenario_data, SimScenario};
use crate::study::{
    fit_horseshoe, run_study, StudyConfig, StudyReport, DEFAULT_CREDIBLE_LEVEL,
};

pub const SCHEMA_VERSION: u32 = 1;

fn package_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

#[derive(Debug, Parser)]
#[command(
    name = "betareg",
    version,
    about = "Sparse Bayesian Beta regression: Horseshoe Gibbs sampling and a transformed-response Lasso baseline"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for replication-parallel commands (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scenario as CSV files
    Simulate(SimulateArgs),
    /// Fit the Horseshoe sampler to a dataset directory
    Fit(FitArgs),
    /// Run a scenario x replication study of Horseshoe vs transformed Lasso
    Benchmark(BenchmarkArgs),
    /// Export trace and ACF tables from a fit with retained draws
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON (fields n, p, s_star, rho_x, phi_true, n_test, seed)
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for X.csv, y.csv, X_test.csv, y_test.csv, beta0.csv
    #[arg(long)]
    pub out: PathBuf,
    /// Override the scenario seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Directory containing X.csv and y.csv
    #[arg(long)]
    pub data: PathBuf,
    /// Output path for the results JSON
    #[arg(long)]
    pub out: PathBuf,
    /// Optional fit-config JSON; command-line flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Beta precision phi (required unless --estimate-phi or set in config)
    #[arg(long)]
    pub phi: Option<f64>,
    /// Tempering exponent in (0, 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Credible level for intervals and selection (default 0.95)
    #[arg(long)]
    pub credible_level: Option<f64>,
    /// Retain posterior draws as CSV files next to the results JSON
    #[arg(long)]
    pub keep_draws: bool,
    /// Estimate phi from the responses by method of moments
    #[arg(long)]
    pub estimate_phi: bool,
    /// Prepend a column of ones to the design
    #[arg(long)]
    pub intercept: bool,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Study JSON: scenario list plus sampler/lasso settings
    #[arg(long)]
    pub config: PathBuf,
    /// Independent replications per scenario
    #[arg(long)]
    pub replications: usize,
    /// Output JSON path (a per-replication CSV is written alongside)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Results JSON produced by `fit --keep-draws`
    #[arg(long)]
    pub results: PathBuf,
    /// Dataset directory; beta0.csv (if present) drives coordinate grouping
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for trace/ACF CSVs
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated coordinate list (default: 3 per true-value group)
    #[arg(long)]
    pub coordinates: Option<String>,
    #[arg(long, default_value_t = 40)]
    pub max_lag: usize,
}

impl Cli {
    pub fn run(self) -> Result<()> {
        configure_threads(self.threads);
        match self.command {
            Command::Simulate(args) => cmd_simulate(&args),
            Command::Fit(args) => cmd_fit(&args),
            Command::Benchmark(args) => cmd_benchmark(&args),
            Command::Diagnose(args) => cmd_diagnose(&args),
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: Option<usize>) {
    if threads.is_some() {
        eprintln!("note: built without the `parallel` feature; --threads is ignored");
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFileEcho {
    schema_version: u32,
    package_version: String,
    scenario: SimScenario,
}

/// Materialize a scenario into CSV files plus a config echo.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut scenario: SimScenario = read_json(&args.config)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    scenario.validate()?;
    let data = gen_scenario_data(&scenario)?;

    let dir = &args.out;
    write_matrix_csv(dir.join("X.csv"), "x", &data.x)?;
    write_vector_csv(dir.join("y.csv"), "y", &data.y)?;
    write_matrix_csv(dir.join("X_test.csv"), "x", &data.x_test)?;
    write_vector_csv(dir.join("y_test.csv"), "y", &data.y_test)?;
    write_vector_csv(dir.join("beta0.csv"), "beta0", &data.beta0)?;
    write_json(
        dir.join("scenario.json"),
        &ScenarioFileEcho {
            schema_version: SCHEMA_VERSION,
            package_version: package_version(),
            scenario,
        },
    )?;
    eprintln!(
        "wrote scenario (n={}, p={}, s*={}) to {}",
        scenario.n,
        scenario.p,
        scenario.s_star,
        dir.display()
    );
    Ok(())
}

/// Optional fit-config file; any field may be omitted and overridden by
/// command-line flags.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitFileConfig {
    pub phi: Option<f64>,
    pub alpha: Option<f64>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub credible_level: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitConfigEcho {
    pub phi: f64,
    pub phi_estimated: bool,
    pub alpha: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chains: usize,
    pub credible_level: f64,
    pub intercept: bool,
    pub data_dir: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// chain x coordinate effective sample sizes (null for degenerate series)
    pub per_chain_ess: Vec<Vec<Option<f64>>>,
    /// Per-chain beta draw files, relative to the results JSON
    pub draws_files: Vec<String>,
    /// Per-chain exact log-likelihood trace files
    pub log_likelihood_files: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitResults {
    pub schema_version: u32,
    pub package_version: String,
    pub config: FitConfigEcho,
    pub summary: PosteriorSummary,
    pub diagnostics: FitDiagnostics,
    pub timing: Timing,
}

/// Fit the Horseshoe sampler to X.csv / y.csv in a data directory.
pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let file: FitFileConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => FitFileConfig::default(),
    };

    let x = read_matrix_csv(args.data.join("X.csv"))?;
    let y = read_vector_csv(args.data.join("y.csv"))?;
    let mut dataset = Dataset::new(x, y)?;
    if args.intercept {
        dataset = dataset.with_intercept_column();
    }

    let (phi, phi_estimated) = match args.phi.or(file.phi) {
        Some(phi) => (phi, false),
        None if args.estimate_phi => (estimate_phi_moments(dataset.y())?, true),
        None => {
            return Err(Error::Validation(vec![
                "phi is required: pass --phi <value> (or set it in the fit config), \
                 or pass --estimate-phi to use a method-of-moments estimate from y"
                    .into(),
            ]))
        }
    };

    let defaults = FitConfig::default();
    let config = FitConfig {
        phi,
        alpha: args.alpha.or(file.alpha).unwrap_or(defaults.alpha),
        iterations: args.iterations.or(file.iterations).unwrap_or(defaults.iterations),
        burn_in: args.burn_in.or(file.burn_in).unwrap_or(defaults.burn_in),
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
        chains: args.chains.or(file.chains).unwrap_or(defaults.chains),
    };
    config.validate()?;
    let credible_level = args
        .credible_level
        .or(file.credible_level)
        .unwrap_or(DEFAULT_CREDIBLE_LEVEL);

    let started = Instant::now();
    let fit = fit_horseshoe(&dataset, &config, credible_level, false)?;
    let seconds = started.elapsed().as_secs_f64();

    let per_chain_ess: Vec<Vec<Option<f64>>> = fit
        .chains
        .iter()
        .map(|draws| {
            (0..draws.p())
                .map(|j| {
                    let col: Vec<f64> = draws.beta_draws.column(j).iter().copied().collect();
                    ess(&col).ok()
                })
                .collect()
        })
        .collect();

    let mut draws_files = Vec::new();
    let mut log_likelihood_files = Vec::new();
    if args.keep_draws {
        let stem = results_stem(&args.out);
        let parent = args.out.parent().unwrap_or(Path::new("."));
        for (k, draws) in fit.chains.iter().enumerate() {
            let beta_name = format!("{stem}_draws_chain{k}.csv");
            write_matrix_csv(parent.join(&beta_name), "x", &draws.beta_draws)?;
            draws_files.push(beta_name);
            let ll_name = format!("{stem}_loglik_chain{k}.csv");
            write_vector_csv(
                parent.join(&ll_name),
                "log_likelihood",
                &DVector::from_column_slice(&draws.log_likelihood_trace),
            )?;
            log_likelihood_files.push(ll_name);
        }
    }

    let results = FitResults {
        schema_version: SCHEMA_VERSION,
        package_version: package_version(),
        config: FitConfigEcho {
            phi: config.phi,
            phi_estimated,
            alpha: config.alpha,
            iterations: config.iterations,
            burn_in: config.burn_in,
            seed: config.seed,
            chains: config.chains,
            credible_level,
            intercept: args.intercept,
            data_dir: args.data.display().to_string(),
        },
        summary: fit.summary,
        diagnostics: FitDiagnostics {
            per_chain_ess,
            draws_files,
            log_likelihood_files,
        },
        timing: Timing { seconds },
    };
    write_json(&args.out, &results)?;
    eprintln!(
        "fit {} chains x {} iterations in {seconds:.2}s -> {}",
        config.chains,
        config.iterations,
        args.out.display()
    );
    Ok(())
}

fn results_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BenchmarkResults {
    pub schema_version: u32,
    pub package_version: String,
    pub report: StudyReport,
}

/// Run the scenario x replication study and persist the aggregate report
/// (JSON) plus a tidy per-replication CSV.
pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let config: StudyConfig = read_json(&args.config)?;
    let started = Instant::now();
    let report = run_study(&config, args.replications)?;
    let seconds = started.elapsed().as_secs_f64();
    for sc in &report.scenarios {
        eprintln!(
            "scenario {}: {} ok, {} failed",
            sc.name.clone().unwrap_or_else(|| format!(
                "n={} p={} s*={}",
                sc.scenario.n, sc.scenario.p, sc.scenario.s_star
            )),
            sc.replications.len(),
            sc.failures.len()
        );
    }

    let results = BenchmarkResults {
        schema_version: SCHEMA_VERSION,
        package_version: package_version(),
        report,
    };
    write_json(&args.out, &results)?;
    let csv_path = args.out.with_extension("csv");
    crate::io::write_text(&csv_path, &replications_csv(&results.report))?;
    eprintln!(
        "benchmark finished in {seconds:.1}s -> {} and {}",
        args.out.display(),
        csv_path.display()
    );
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| crate::io::format_float(x)).unwrap_or_default()
}

/// One row per scenario x replication x method.
fn replications_csv(report: &StudyReport) -> String {
    let mut text = String::from(
        "scenario,name,fit_phi,replication,method,l2_beta,l2_linpred,l2_y,l2_ytest,\
         precision,recall,f1,specificity,fdr,tp,fp,tn,fn\n",
    );
    for (s, sc) in report.scenarios.iter().enumerate() {
        for rep in &sc.replications {
            for (method, m) in [("horseshoe", &rep.horseshoe), ("lasso", &rep.lasso)] {
                push_metrics_row(&mut text, s, sc.name.as_deref(), sc.fit_phi, rep.replication, method, m);
            }
        }
    }
    text
}

fn push_metrics_row(
    text: &mut String,
    scenario_index: usize,
    name: Option<&str>,
    fit_phi: f64,
    replication: usize,
    method: &str,
    m: &MetricsReport,
) {
    use crate::io::format_float as ff;
    text.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        scenario_index,
        name.unwrap_or(""),
        ff(fit_phi),
        replication,
        method,
        ff(m.estimation.l2_beta),
        ff(m.estimation.l2_linpred),
        ff(m.estimation.l2_y),
        ff(m.estimation.l2_ytest),
        opt(m.selection.precision),
        opt(m.selection.recall),
        opt(m.selection.f1),
        opt(m.selection.specificity),
        opt(m.selection.fdr),
        m.selection.true_positives,
        m.selection.false_positives,
        m.selection.true_negatives,
        m.selection.false_negatives,
    ));
}

/// Export trace and ACF tables for selected coordinates of a kept-draws fit.
pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<()> {
    let results: FitResults = read_json(&args.results)?;
    if results.diagnostics.draws_files.is_empty() {
        return Err(Error::Validation(vec![
            "no retained draws in this fit; re-run `betareg fit` with --keep-draws".into(),
        ]));
    }

    let beta0 = args
        .data
        .as_ref()
        .map(|dir| dir.join("beta0.csv"))
        .filter(|p| p.exists())
        .map(read_vector_csv)
        .transpose()?;

    let results_dir = args.results.parent().unwrap_or(Path::new("."));
    let first = read_matrix_csv(results_dir.join(&results.diagnostics.draws_files[0]))?;
    let p = first.ncols();

    let coordinates = match &args.coordinates {
        Some(list) => parse_coordinates(list, p)?,
        None => default_coordinates(beta0.as_ref(), p),
    };

    for (k, file) in results.diagnostics.draws_files.iter().enumerate() {
        let beta = if k == 0 {
            first.clone()
        } else {
            read_matrix_csv(results_dir.join(file))?
        };
        let kept = beta.nrows();
        let draws = PosteriorDraws {
            beta_draws: beta,
            tau2_draws: vec![],
            lambda2_draws: None,
            log_likelihood_trace: vec![],
        };
        export_traces(&draws, &coordinates, args.out.join(format!("traces_chain{k}.csv")))?;
        let max_lag = args.max_lag.min(kept.saturating_sub(1));
        export_acf(&draws, &coordinates, max_lag, args.out.join(format!("acf_chain{k}.csv")))?;
    }
    eprintln!(
        "exported {} coordinates x {} chains to {}",
        coordinates.len(),
        results.diagnostics.draws_files.len(),
        args.out.display()
    );
    Ok(())
}

fn parse_coordinates(list: &str, p: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in list.split(',') {
        let c: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::Parameter(format!("bad coordinate '{part}'")))?;
        if c >= p {
            return Err(Error::Parameter(format!(
                "coordinate {c} out of range (p = {p})"
            )));
        }
        out.push(c);
    }
    Ok(out)
}

/// Default layout: the first three coordinates from each sign group of the
/// true coefficients (positive, negative, zero) when the truth is known,
/// otherwise the first three coordinates.
fn default_coordinates(beta0: Option<&DVector<f64>>, p: usize) -> Vec<usize> {
    match beta0 {
        Some(b0) => {
            let take = |pred: &dyn Fn(f64) -> bool| -> Vec<usize> {
                (0..b0.len().min(p)).filter(|&j| pred(b0[j])).take(3).collect()
            };
            let mut coords = take(&|v| v > 0.0);
            coords.extend(take(&|v| v < 0.0));
            coords.extend(take(&|v| v == 0.0));
            if coords.is_empty() {
                (0..p.min(3)).collect()
            } else {
                coords
            }
        }
        None => (0..p.min(3)).collect(),
    }
}
