//! Command-line surface: data ingestion, test execution, distribution
//! queries and simulation studies.
//!
//! Exit codes: 0 success, 2 parse/config error, 3 validation error,
//! 4 degenerate problem.

mod io;

use clap::{Args, Parser, Subcommand, ValueEnum};
use io::{fingerprint, read_groups, read_matrix, InputFingerprint};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use wishroot::{
    run_approx_study, run_estimator, run_pvalue_study, CcaSpec, CovEqualSpec, DataMatrix,
    EstimatorConfig, Error as CoreError, FitMethod, ManovaSpec, PcevSpec, ProblemSpec, Scenario,
    ScenarioConfig, TestResult,
};

const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "wishroot",
    about = "Largest-root tests for high-dimensional data with permutation-calibrated Tracy-Widom p-values",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multivariate test and write a JSON result document.
    Test(TestArgs),
    /// Evaluate the (location-scale) TW(1) distribution.
    Tw(TwArgs),
    /// Run a simulation study and write a CSV table.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FitArg {
    Mm,
    Mle,
    Ad,
    Adr,
}

impl From<FitArg> for FitMethod {
    fn from(f: FitArg) -> FitMethod {
        match f {
            FitArg::Mm => FitMethod::Mm,
            FitArg::Mle => FitMethod::Mle,
            FitArg::Ad => FitMethod::Ad,
            FitArg::Adr => FitMethod::Adr,
        }
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(subcommand)]
    family: TestFamily,
}

#[derive(Args, Clone)]
struct CommonTestArgs {
    /// Number of permutations used to fit the null family.
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Fitting strategy.
    #[arg(long, value_enum, default_value = "mm")]
    fit: FitArg,
    /// Random seed (required: no silent nondeterminism).
    #[arg(long)]
    seed: u64,
    /// Replace A by its linearly shrunk version in every replicate.
    #[arg(long)]
    shrinkage: bool,
    /// Also compute an add-one permutation p-value over this many
    /// permutations (same seed lineage as the fit).
    #[arg(long)]
    perm: Option<usize>,
    /// Worker threads (default: machine parallelism). Affects wall time
    /// only, never numeric output.
    #[arg(long)]
    threads: Option<usize>,
    /// Output path for the JSON result document.
    #[arg(long)]
    out: PathBuf,
    /// Relative eigenvalue cutoff for rank truncation.
    #[arg(long, default_value_t = 1e-9)]
    rank_tol: f64,
    /// Input CSVs have no header row.
    #[arg(long)]
    no_header: bool,
}

#[derive(Subcommand)]
enum TestFamily {
    /// One-way MANOVA (Y + group labels).
    Manova {
        #[arg(long)]
        y: PathBuf,
        /// Single-column CSV of group labels aligned with the rows of Y.
        #[arg(long)]
        groups: PathBuf,
        #[command(flatten)]
        common: CommonTestArgs,
    },
    /// Equality of two covariance matrices (X vs Y).
    Covequal {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[command(flatten)]
        common: CommonTestArgs,
    },
    /// First canonical correlation (X high-dimensional, Y projector side).
    Cca {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[command(flatten)]
        common: CommonTestArgs,
    },
    /// Principal component of explained variance (Y responses, X covariates).
    Pcev {
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        x: PathBuf,
        /// Optional confounder matrix projected out of the design.
        #[arg(long)]
        confounders: Option<PathBuf>,
        #[command(flatten)]
        common: CommonTestArgs,
    },
}

#[derive(Args)]
struct TwArgs {
    #[command(subcommand)]
    which: TwWhich,
}

#[derive(Subcommand)]
enum TwWhich {
    /// Cumulative distribution function.
    Cdf(TwEval),
    /// Density.
    Pdf(TwEval),
    /// Quantile function (argument is a probability in (0, 1)).
    Quantile(TwEval),
}

#[derive(Args)]
struct TwEval {
    /// Location parameter of the family sigma TW(1) + mu.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// Scale parameter (must be positive).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Point (or probability, for quantile) to evaluate.
    #[arg(allow_hyphen_values = true)]
    value: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(subcommand)]
    study: Study,
}

#[derive(Subcommand)]
enum Study {
    /// Empirical CDF of singular-pair largest roots vs the four fitted
    /// families (columns grid,empirical,mm,mle,ad,adr).
    Approx {
        /// Dimension of the Wishart pair.
        #[arg(long)]
        p: usize,
        /// Degrees of freedom of A.
        #[arg(long)]
        m: usize,
        /// Degrees of freedom of B.
        #[arg(long)]
        n: usize,
        /// Subsample size used for the fits.
        #[arg(long, default_value_t = 100)]
        k: usize,
        /// Number of replicates behind the empirical benchmark.
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        /// Replace A by its linearly shrunk version.
        #[arg(long)]
        shrinkage: bool,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        rank_tol: f64,
        /// Output CSV path (a sidecar <out>.config.json is written too).
        #[arg(long)]
        out: PathBuf,
    },
    /// Paired Tracy-Widom and permutation p-values over simulated datasets
    /// (columns sim,p_value_tw,p_value_perm).
    Pvalues {
        /// Problem family to simulate.
        #[arg(long, value_enum)]
        method: PvalueFamily,
        /// Varying dimension (responses for pcev, the high-dimensional side
        /// for cca, both sides for covequal).
        #[arg(long)]
        p: usize,
        /// Sample size.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Projector-side dimension for cca.
        #[arg(long, default_value_t = 20)]
        q: usize,
        /// Covariance association parameter (covequal, cca).
        #[arg(long, conflicts_with = "r2")]
        rho: Option<f64>,
        /// Explained-variance parameter (pcev).
        #[arg(long)]
        r2: Option<f64>,
        /// Permutations per dataset used to fit the null family.
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, value_enum, default_value = "mm")]
        fit: FitArg,
        /// Number of simulated datasets.
        #[arg(long, default_value_t = 100)]
        sims: usize,
        /// Permutations behind the reference p-value.
        #[arg(long, default_value_t = 500)]
        perms: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        rank_tol: f64,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PvalueFamily {
    Covequal,
    Cca,
    Pcev,
}

/// Result document written by `test`.
#[derive(serde::Serialize)]
struct ResultDocument {
    schema_version: &'static str,
    result: TestResult,
    timing_seconds: f64,
    inputs: Vec<InputFingerprint>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Tw(args) => cmd_tw(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

/// CLI-level error with its exit code.
#[derive(Debug)]
enum CliError {
    Parse(String),
    Validation(String),
    Degenerate(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Validation(m) | CliError::Degenerate(m) => {
                f.write_str(m)
            }
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
            CliError::Io(_) => EXIT_PARSE,
        }
    }
}

impl From<io::ParseError> for CliError {
    fn from(e: io::ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Validation(_) => CliError::Validation(e.to_string()),
            CoreError::Degenerate(_)
            | CoreError::DegenerateNull { .. }
            | CoreError::FitFailure { .. } => CliError::Degenerate(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Run `body` inside a rayon pool sized by `threads` (default pool when
/// unset). The numeric output is thread-count independent by construction.
fn with_pool<T>(
    threads: Option<usize>,
    body: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => body(),
        Some(t) => {
            if t == 0 {
                return Err(CliError::Parse("--threads must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Parse(format!("cannot build thread pool: {e}")))?;
            pool.install(body)
        }
    }
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (spec, common, inputs) = load_test_inputs(args)?;

    let config = EstimatorConfig {
        k: common.k,
        fit_method: common.fit.into(),
        seed: common.seed,
        shrinkage: common.shrinkage,
        n_perm_reference: common.perm,
        rank_tolerance: common.rank_tol,
    };
    if common.perm == Some(0) {
        return Err(CliError::Parse("--perm must be at least 1".into()));
    }
    let result = with_pool(common.threads, || Ok(run_estimator(&spec, &config)?))?;

    let document = ResultDocument {
        schema_version: "1",
        result,
        timing_seconds: started.elapsed().as_secs_f64(),
        inputs,
    };
    let json = serde_json::to_string_pretty(&document).expect("document serializes");
    std::fs::write(&common.out, json.as_bytes())?;

    let r = &document.result;
    println!("problem: {}", r.problem_label);
    println!(
        "lambda_obs = {:.6} (logit {:.6}, effective rank {})",
        r.lambda_obs, r.logit_obs, r.effective_rank
    );
    println!(
        "fit ({}): mu = {:.6}, sigma = {:.6} [K = {}, excluded {}]",
        r.fit.fit_method, r.fit.mu, r.fit.sigma, r.k, r.excluded_roots
    );
    println!("p_value_tw = {:e}", r.p_value_tw);
    if let Some(p) = r.p_value_perm {
        println!(
            "p_value_perm = {:e} ({} permutations)",
            p,
            r.n_perm_reference.unwrap_or(0)
        );
    }
    println!("wrote {}", common.out.display());
    Ok(())
}

type LoadedTest = (ProblemSpec, CommonTestArgs, Vec<InputFingerprint>);

fn load_test_inputs(args: TestArgs) -> Result<LoadedTest, CliError> {
    let fp = |role: &'static str, path: &Path, m: &DataMatrix| -> Result<InputFingerprint, CliError> {
        Ok(fingerprint(role, path, m.n(), m.p())?)
    };
    match args.family {
        TestFamily::Manova { y, groups, common } => {
            let ym = read_matrix(&y, !common.no_header)?;
            let labels = read_groups(&groups, !common.no_header)?;
            let mut inputs = vec![fp("y", &y, &ym)?];
            inputs.push(InputFingerprint {
                role: "groups",
                path: groups.display().to_string(),
                rows: labels.len(),
                cols: 1,
                content_hash: format!(
                    "fnv1a64:{}",
                    io::fnv1a64_hex(&std::fs::read(&groups).map_err(CliError::from)?)
                ),
            });
            let spec = ProblemSpec::Manova(ManovaSpec::new(ym, labels)?);
            Ok((spec, common, inputs))
        }
        TestFamily::Covequal { x, y, common } => {
            let xm = read_matrix(&x, !common.no_header)?;
            let ym = read_matrix(&y, !common.no_header)?;
            let inputs = vec![fp("x", &x, &xm)?, fp("y", &y, &ym)?];
            let spec = ProblemSpec::CovEqual(CovEqualSpec::new(xm, ym)?);
            Ok((spec, common, inputs))
        }
        TestFamily::Cca { x, y, common } => {
            let xm = read_matrix(&x, !common.no_header)?;
            let ym = read_matrix(&y, !common.no_header)?;
            let inputs = vec![fp("x", &x, &xm)?, fp("y", &y, &ym)?];
            let spec = ProblemSpec::Cca(CcaSpec::new(xm, ym)?);
            Ok((spec, common, inputs))
        }
        TestFamily::Pcev {
            y,
            x,
            confounders,
            common,
        } => {
            let ym = read_matrix(&y, !common.no_header)?;
            let xm = read_matrix(&x, !common.no_header)?;
            let mut inputs = vec![fp("y", &y, &ym)?, fp("x", &x, &xm)?];
            let conf = match &confounders {
                Some(path) => {
                    let cm = read_matrix(path, !common.no_header)?;
                    inputs.push(fp("confounders", path, &cm)?);
                    Some(cm)
                }
                None => None,
            };
            let spec = ProblemSpec::Pcev(PcevSpec::new(ym, xm, conf)?);
            Ok((spec, common, inputs))
        }
    }
}

fn cmd_tw(args: TwArgs) -> Result<(), CliError> {
    let (eval, kind): (&TwEval, &str) = match &args.which {
        TwWhich::Cdf(e) => (e, "cdf"),
        TwWhich::Pdf(e) => (e, "pdf"),
        TwWhich::Quantile(e) => (e, "quantile"),
    };
    if !(eval.sigma > 0.0) {
        return Err(CliError::Parse(format!(
            "--sigma must be positive, got {}",
            eval.sigma
        )));
    }
    let family = wishroot::TwLocationScale::new(eval.mu, eval.sigma, FitMethod::Mm, 0, 0.0)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let out = match kind {
        "cdf" => family.cdf(eval.value),
        "pdf" => family.pdf(eval.value),
        _ => {
            if !(eval.value > 0.0 && eval.value < 1.0) {
                return Err(CliError::Parse(format!(
                    "quantile probability must lie in (0, 1), got {}",
                    eval.value
                )));
            }
            family.quantile(eval.value)
        }
    };
    let value = out.map_err(|e| CliError::Parse(e.to_string()))?;
    // 12 significant digits
    println!("{value:.11e}");
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    match args.study {
        Study::Approx {
            p,
            m,
            n,
            k,
            reps,
            seed,
            shrinkage,
            threads,
            rank_tol,
            out,
        } => {
            let config = ScenarioConfig {
                scenario: if shrinkage {
                    Scenario::ApproxCdfShrunk
                } else {
                    Scenario::ApproxCdf
                },
                p,
                q: 0,
                n,
                m,
                assoc: 0.0,
                k,
                reps,
                n_perm: 0,
                seed,
                fit_method: FitMethod::Mm,
                rank_tolerance: rank_tol,
            };
            let study = with_pool(threads, || Ok(run_approx_study(&config)?))?;
            let mut csv = String::from("grid,empirical,mm,mle,ad,adr\n");
            for row in &study.rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.grid, row.empirical, row.mm, row.mle, row.ad, row.adr
                ));
            }
            std::fs::write(&out, csv.as_bytes())?;
            write_sidecar(&out, &config, Some(&study.ks))?;
            println!(
                "wrote {} ({} rows); KS: mm {:.4}, mle {:.4}, ad {:.4}, adr {:.4}",
                out.display(),
                study.rows.len(),
                study.ks.mm,
                study.ks.mle,
                study.ks.ad,
                study.ks.adr
            );
            Ok(())
        }
        Study::Pvalues {
            method,
            p,
            n,
            q,
            rho,
            r2,
            k,
            fit,
            sims,
            perms,
            seed,
            threads,
            rank_tol,
            out,
        } => {
            let (scenario, assoc) = match method {
                PvalueFamily::Covequal => (Scenario::CovEqual, rho.unwrap_or(0.0)),
                PvalueFamily::Cca => (Scenario::Cca, rho.unwrap_or(0.0)),
                PvalueFamily::Pcev => {
                    if rho.is_some() {
                        return Err(CliError::Parse(
                            "pcev uses --r2, not --rho".into(),
                        ));
                    }
                    (Scenario::Pcev, r2.unwrap_or(0.0))
                }
            };
            if matches!(method, PvalueFamily::Covequal | PvalueFamily::Cca) && r2.is_some() {
                return Err(CliError::Parse(format!(
                    "{} uses --rho, not --r2",
                    match method {
                        PvalueFamily::Covequal => "covequal",
                        _ => "cca",
                    }
                )));
            }
            let config = ScenarioConfig {
                scenario,
                p,
                q,
                n,
                m: 0,
                assoc,
                k,
                reps: sims,
                n_perm: perms,
                seed,
                fit_method: fit.into(),
                rank_tolerance: rank_tol,
            };
            let rows = with_pool(threads, || Ok(run_pvalue_study(&config)?))?;
            let mut csv = String::from("sim,p_value_tw,p_value_perm\n");
            for row in &rows {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    row.sim, row.p_value_tw, row.p_value_perm
                ));
            }
            match &out {
                Some(path) => {
                    std::fs::write(path, csv.as_bytes())?;
                    write_sidecar(path, &config, None)?;
                    println!("wrote {} ({} rows)", path.display(), rows.len());
                }
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}

/// Sidecar JSON with the resolved configuration (and study summary, when
/// available) next to a CSV output.
fn write_sidecar(
    out: &Path,
    config: &ScenarioConfig,
    ks: Option<&wishroot::KsByMethod>,
) -> Result<(), CliError> {
    #[derive(serde::Serialize)]
    struct Sidecar<'a> {
        config: &'a ScenarioConfig,
        #[serde(skip_serializing_if = "Option::is_none")]
        ks: Option<&'a wishroot::KsByMethod>,
    }
    let path = PathBuf::from(format!("{}.config.json", out.display()));
    let json = serde_json::to_string_pretty(&Sidecar { config, ks }).expect("config serializes");
    std::fs::write(path, json.as_bytes())?;
    Ok(())
}
