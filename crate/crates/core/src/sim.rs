//! Data generators and scenario runners for the simulation studies: the
//! CDF-approximation study on singular Wishart pairs and the paired
//! p-value study on the covariance-equality, CCA and PCEV families.

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::estimator::{run_estimator, EstimatorConfig};
use crate::fitting::{self, RootSample};
use crate::linalg::{self, DoubleWishartPair, LargestRoot, PairMeta};
use crate::problems::{CcaSpec, CovEqualSpec, PcevSpec, ProblemSpec};
use crate::rng::{child_seed, replicate_rng, task_rng};
use crate::shrinkage;
use crate::tw::{FitMethod, TwLocationScale};
use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Which study or problem family a configuration drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// CDF approximation on raw singular Wishart pairs.
    ApproxCdf,
    /// Same with A replaced by its linearly shrunk version.
    ApproxCdfShrunk,
    CovEqual,
    Cca,
    Pcev,
}

/// Parameters for one simulation run. Fields are interpreted per scenario:
/// `p` is the (varying) dimension, `q` the projector/covariate dimension for
/// CCA, `n` the per-sample size, `m`/`n` the Wishart degrees of freedom for
/// the approximation studies, `assoc` the association parameter (rho or R^2)
/// and `reps` the number of Wishart replicates or simulated datasets.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub m: usize,
    pub assoc: f64,
    pub k: usize,
    pub reps: usize,
    pub n_perm: usize,
    pub seed: u64,
    pub fit_method: FitMethod,
    pub rank_tolerance: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::validation("dimension p must be positive"));
        }
        match self.scenario {
            Scenario::ApproxCdf | Scenario::ApproxCdfShrunk => {
                if self.m == 0 || self.n == 0 {
                    return Err(Error::validation("wishart degrees of freedom must be positive"));
                }
                if self.k < 10 || self.k > self.reps {
                    return Err(Error::validation(format!(
                        "subsample size k = {} must lie in [10, reps = {}]",
                        self.k, self.reps
                    )));
                }
            }
            Scenario::CovEqual | Scenario::Cca | Scenario::Pcev => {
                if self.n < 4 {
                    return Err(Error::validation("sample size n must be at least 4"));
                }
                if !(0.0..1.0).contains(&self.assoc) {
                    return Err(Error::validation(format!(
                        "association parameter must lie in [0, 1), got {}",
                        self.assoc
                    )));
                }
                if self.scenario == Scenario::Pcev && self.n % 2 != 0 {
                    return Err(Error::validation(
                        "the balanced binary covariate needs an even sample size",
                    ));
                }
                if self.scenario == Scenario::Cca && self.q >= self.n {
                    return Err(Error::validation(
                        "the CCA projector dimension must be below the sample size",
                    ));
                }
            }
        }
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance < 1.0) {
            return Err(Error::validation("rank tolerance must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Sum of df outer products of N_p(0, Sigma) rows: a (possibly singular)
/// Wishart draw. Sigma may be rank deficient; it must be symmetric PSD.
pub fn gen_wishart(
    p: usize,
    df: usize,
    sigma: &DMatrix<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<DMatrix<f64>> {
    if df == 0 {
        return Err(Error::validation("wishart degrees of freedom must be >= 1"));
    }
    let z = gen_wishart_factor(p, df, sigma, rng)?;
    Ok(z.transpose() * z)
}

/// The underlying df x p normal factor Z with rows N_p(0, Sigma), so that
/// Z^T Z is the Wishart draw.
fn gen_wishart_factor(
    p: usize,
    df: usize,
    sigma: &DMatrix<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<DMatrix<f64>> {
    if sigma.nrows() != p || sigma.ncols() != p {
        return Err(Error::validation("scale matrix dimension mismatch"));
    }
    let is_identity = sigma
        .iter()
        .enumerate()
        .all(|(k, &v)| v == if k % (p + 1) == 0 { 1.0 } else { 0.0 });
    let z = DMatrix::from_fn(df, p, |_, _| StandardNormal.sample(rng));
    if is_identity {
        return Ok(z);
    }
    // PSD square root via symmetric eigendecomposition (tolerates rank
    // deficiency, rejects indefinite inputs).
    let eig = sigma.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut half = DMatrix::zeros(p, p);
    for k in 0..p {
        let ev = eig.eigenvalues[k];
        if ev < -1e-10 * max_ev.max(1.0) {
            return Err(Error::validation(
                "scale matrix is not positive semi-definite",
            ));
        }
        if ev > 0.0 {
            let col = eig.eigenvectors.column(k) * ev.sqrt();
            half += &col * col.transpose() / ev.sqrt().max(1e-300); // U sqrt(d) U^T accumulation
        }
    }
    // half = U sqrt(D) U^T
    Ok(z * half)
}

/// AR(1) rows: unit marginals with Cov(Y_i, Y_j) = rho^{|i-j|}.
fn ar1_rows(n: usize, p: usize, rho: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, p);
    let scale = (1.0 - rho * rho).sqrt();
    for i in 0..n {
        let mut prev = 0.0;
        for j in 0..p {
            let z: f64 = StandardNormal.sample(rng);
            let v = if j == 0 { z } else { rho * prev + scale * z };
            out[(i, j)] = v;
            prev = v;
        }
    }
    out
}

/// Generate one dataset for a problem-family scenario.
pub fn gen_scenario_data(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<ProblemSpec> {
    config.validate()?;
    let n = config.n;
    match config.scenario {
        Scenario::CovEqual => {
            let x = DMatrix::from_fn(n, config.p, |_, _| StandardNormal.sample(rng));
            let y = ar1_rows(n, config.p, config.assoc, rng);
            Ok(ProblemSpec::CovEqual(CovEqualSpec::new(
                DataMatrix::unlabeled(x)?,
                DataMatrix::unlabeled(y)?,
            )?))
        }
        Scenario::Cca => {
            // X is the high-dimensional side (n x p); Y the projector side
            // (n x q). Cross-covariance rho on the first two coordinates.
            let x = DMatrix::from_fn(n, config.p, |_, _| StandardNormal.sample(rng));
            let mut y = DMatrix::from_fn(n, config.q, |_, _| StandardNormal.sample(rng));
            let rho = config.assoc;
            let scale = (1.0 - rho * rho).sqrt();
            for j in 0..2.min(config.q).min(config.p) {
                for i in 0..n {
                    y[(i, j)] = rho * x[(i, j)] + scale * y[(i, j)];
                }
            }
            Ok(ProblemSpec::Cca(CcaSpec::new(
                DataMatrix::unlabeled(x)?,
                DataMatrix::unlabeled(y)?,
            )?))
        }
        Scenario::Pcev => {
            // Balanced binary covariate; beta^2 = R^2 / (1 - R^2) on the
            // first 50 (or p) responses.
            let r2 = config.assoc;
            let beta = (r2 / (1.0 - r2)).sqrt();
            let affected = 50.min(config.p);
            let x = DMatrix::from_fn(n, 1, |i, _| if i < n / 2 { 0.0 } else { 1.0 });
            let y = DMatrix::from_fn(n, config.p, |i, j| {
                let noise: f64 = StandardNormal.sample(rng);
                if j < affected {
                    beta * x[(i, 0)] + noise
                } else {
                    noise
                }
            });
            Ok(ProblemSpec::Pcev(PcevSpec::new(
                DataMatrix::unlabeled(y)?,
                DataMatrix::unlabeled(x)?,
                None,
            )?))
        }
        _ => Err(Error::validation(
            "gen_scenario_data applies to the problem-family scenarios only",
        )),
    }
}

/// One row of the CDF-approximation table, on the original lambda scale.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ApproxRow {
    pub grid: f64,
    pub empirical: f64,
    pub mm: f64,
    pub mle: f64,
    pub ad: f64,
    pub adr: f64,
}

/// Kolmogorov-Smirnov distances of the four fitted CDFs to the empirical
/// benchmark.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct KsByMethod {
    pub mm: f64,
    pub mle: f64,
    pub ad: f64,
    pub adr: f64,
}

impl KsByMethod {
    pub fn get(&self, method: FitMethod) -> f64 {
        match method {
            FitMethod::Mm => self.mm,
            FitMethod::Mle => self.mle,
            FitMethod::Ad => self.ad,
            FitMethod::Adr => self.adr,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ApproxStudy {
    pub rows: Vec<ApproxRow>,
    pub ks: KsByMethod,
    pub fits: Vec<TwLocationScale>,
    /// Clipped roots excluded from the fitting subsample.
    pub excluded: usize,
}

/// Empirical CDF of `reps` largest roots of seeded singular Wishart pairs
/// versus the four fitted location-scale families estimated from the first
/// K roots. Reproduces the CDF-approximation protocol (and its shrunk-A
/// variant when the scenario says so).
pub fn run_approx_study(config: &ScenarioConfig) -> Result<ApproxStudy> {
    config.validate()?;
    if !matches!(
        config.scenario,
        Scenario::ApproxCdf | Scenario::ApproxCdfShrunk
    ) {
        return Err(Error::validation(
            "run_approx_study needs an approx_cdf scenario",
        ));
    }
    if config.reps < 100 {
        return Err(Error::validation("need at least 100 replicates"));
    }
    let shrunk = config.scenario == Scenario::ApproxCdfShrunk;
    let roots: Vec<LargestRoot> = (0..config.reps as u64)
        .into_par_iter()
        .map(|i| -> Result<LargestRoot> {
            let mut rng = replicate_rng(config.seed, i);
            let za = DMatrix::from_fn(config.m, config.p, |_, _| StandardNormal.sample(&mut rng));
            let zb = DMatrix::from_fn(config.n, config.p, |_, _| StandardNormal.sample(&mut rng));
            let meta = PairMeta {
                label: "wishart".into(),
                df_a: config.m,
                df_b: config.n,
                p: config.p,
            };
            let pair = if shrunk {
                let base =
                    DoubleWishartPair::from_factors(za.clone(), zb, config.rank_tolerance, meta)?;
                let data = DataMatrix::from_parts_unchecked(
                    za,
                    (1..=config.p).map(|j| format!("v{j}")).collect(),
                );
                shrinkage::build_shrunk_pair(&base, &data)?
            } else {
                DoubleWishartPair::from_factors(za, zb, config.rank_tolerance, meta)?
            };
            linalg::largest_root(&pair)
        })
        .collect::<Result<Vec<_>>>()?;

    // Fit the four families on the first K roots (clipped excluded).
    let sub = &roots[..config.k];
    let excluded = sub.iter().filter(|r| r.clipped).count();
    let logits: Vec<f64> = sub
        .iter()
        .filter(|r| !r.clipped)
        .map(|r| r.logit_lambda)
        .collect();
    let sample = RootSample::new(logits, excluded)?;
    let fits: Vec<TwLocationScale> = FitMethod::ALL
        .iter()
        .map(|&m| fitting::fit(m, &sample))
        .collect::<Result<Vec<_>>>()?;

    // Empirical CDF over all roots, evaluated at the sorted roots.
    let mut sorted: Vec<&LargestRoot> = roots.iter().collect();
    sorted.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    let reps = sorted.len() as f64;
    let mut rows = Vec::with_capacity(sorted.len());
    let mut ks = [0.0f64; 4];
    for (i, root) in sorted.iter().enumerate() {
        let empirical = (i + 1) as f64 / reps;
        let fitted: Vec<f64> = fits
            .iter()
            .map(|f| f.cdf(root.logit_lambda).unwrap_or(f64::NAN))
            .collect();
        for (k, f) in ks.iter_mut().zip(&fitted) {
            *k = k.max((f - empirical).abs()).max((f - i as f64 / reps).abs());
        }
        rows.push(ApproxRow {
            grid: root.lambda,
            empirical,
            mm: fitted[0],
            mle: fitted[1],
            ad: fitted[2],
            adr: fitted[3],
        });
    }
    Ok(ApproxStudy {
        rows,
        ks: KsByMethod {
            mm: ks[0],
            mle: ks[1],
            ad: ks[2],
            adr: ks[3],
        },
        fits,
        excluded,
    })
}

/// One row of the paired p-value table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PvalueRow {
    pub sim: usize,
    pub p_value_tw: f64,
    pub p_value_perm: f64,
}

/// Paired Tracy-Widom and permutation p-values over `reps` simulated
/// datasets of the configured family.
pub fn run_pvalue_study(config: &ScenarioConfig) -> Result<Vec<PvalueRow>> {
    config.validate()?;
    if !matches!(
        config.scenario,
        Scenario::CovEqual | Scenario::Cca | Scenario::Pcev
    ) {
        return Err(Error::validation(
            "run_pvalue_study needs a problem-family scenario",
        ));
    }
    (0..config.reps)
        .into_par_iter()
        .map(|sim| -> Result<PvalueRow> {
            let sim_seed = child_seed(config.seed, sim as u64);
            let mut rng = task_rng(sim_seed);
            let spec = gen_scenario_data(config, &mut rng)?;
            let est_config = EstimatorConfig {
                k: config.k,
                fit_method: config.fit_method,
                seed: sim_seed,
                shrinkage: false,
                n_perm_reference: Some(config.n_perm),
                rank_tolerance: config.rank_tolerance,
            };
            let result = run_estimator(&spec, &est_config)?;
            Ok(PvalueRow {
                sim,
                p_value_tw: result.p_value_tw,
                p_value_perm: result.p_value_perm.expect("reference requested"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::task_rng;

    fn approx_config(p: usize, k: usize, reps: usize, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            scenario: Scenario::ApproxCdf,
            p,
            q: 0,
            n: 4,
            m: 96,
            assoc: 0.0,
            k,
            reps,
            n_perm: 0,
            seed,
            fit_method: FitMethod::Mm,
            rank_tolerance: 1e-9,
        }
    }

    #[test]
    fn wishart_scalar_mean_matches_chi_square() {
        // p = 1, Sigma = 1, df = 1: mean of A over many draws is 1.
        let mut rng = task_rng(1);
        let sigma = DMatrix::identity(1, 1);
        let mut acc = 0.0;
        let draws = 100_000;
        for _ in 0..draws {
            acc += gen_wishart(1, 1, &sigma, &mut rng).unwrap()[(0, 0)];
        }
        let mean = acc / draws as f64;
        assert!((mean - 1.0).abs() < 0.02, "chi-square mean {mean}");
    }

    #[test]
    fn wishart_mean_is_df_sigma() {
        let mut rng = task_rng(2);
        let sigma = DMatrix::identity(3, 3);
        let df = 7;
        let mut acc = DMatrix::zeros(3, 3);
        let draws = 10_000;
        for _ in 0..draws {
            acc += gen_wishart(3, df, &sigma, &mut rng).unwrap();
        }
        acc /= draws as f64;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { df as f64 } else { 0.0 };
                assert!(
                    (acc[(i, j)] - expected).abs() < 0.05 * df as f64,
                    "entry ({i},{j}) = {}",
                    acc[(i, j)]
                );
            }
        }
    }

    #[test]
    fn wishart_zero_scale_gives_zero() {
        let mut rng = task_rng(3);
        let a = gen_wishart(2, 5, &DMatrix::zeros(2, 2), &mut rng).unwrap();
        assert_eq!(a, DMatrix::zeros(2, 2));
    }

    #[test]
    fn wishart_rank_bound() {
        let mut rng = task_rng(4);
        let a = gen_wishart(6, 2, &DMatrix::identity(6, 6), &mut rng).unwrap();
        let rank = a
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .filter(|&&e| e > 1e-9)
            .count();
        assert!(rank <= 2);
    }

    #[test]
    fn wishart_rejects_indefinite_scale() {
        let mut rng = task_rng(5);
        let mut sigma = DMatrix::identity(2, 2);
        sigma[(1, 1)] = -1.0;
        assert!(gen_wishart(2, 3, &sigma, &mut rng).is_err());
    }

    #[test]
    fn ar1_covariance_pattern() {
        // AR1(0.5) at p = 3: covariance row pattern (1, 0.5, 0.25).
        let mut rng = task_rng(6);
        let n = 200_000;
        let y = ar1_rows(n, 3, 0.5, &mut rng);
        let mut cov = DMatrix::zeros(3, 3);
        for i in 0..n {
            for a in 0..3 {
                for b in 0..3 {
                    cov[(a, b)] += y[(i, a)] * y[(i, b)];
                }
            }
        }
        cov /= n as f64;
        let expected = [1.0, 0.5, 0.25];
        for j in 0..3 {
            assert!(
                (cov[(0, j)] - expected[j]).abs() < 0.02,
                "cov(0,{j}) = {}",
                cov[(0, j)]
            );
        }
    }

    #[test]
    fn pcev_beta_formula() {
        // R^2 = 0.5 -> beta = 1.
        let r2: f64 = 0.5;
        let beta = (r2 / (1.0 - r2)).sqrt();
        assert!((beta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn covequal_null_is_spherical() {
        let mut config = approx_config(4, 10, 100, 7);
        config.scenario = Scenario::CovEqual;
        config.n = 20;
        config.p = 3;
        config.assoc = 0.0;
        let mut rng = task_rng(7);
        let spec = gen_scenario_data(&config, &mut rng).unwrap();
        match spec {
            ProblemSpec::CovEqual(s) => {
                assert_eq!(s.x().p(), 3);
                assert_eq!(s.y().n(), 20);
            }
            _ => panic!("wrong spec"),
        }
    }

    #[test]
    fn pcev_odd_n_is_rejected() {
        let mut config = approx_config(4, 10, 100, 8);
        config.scenario = Scenario::Pcev;
        config.n = 21;
        let mut rng = task_rng(8);
        assert!(gen_scenario_data(&config, &mut rng).is_err());
    }

    #[test]
    fn approx_study_shapes_and_monotone_empirical() {
        // Degenerate-ish config p = 1 must still emit a valid table.
        let config = approx_config(1, 20, 120, 9);
        let study = run_approx_study(&config).unwrap();
        assert_eq!(study.rows.len(), 120);
        let mut last = 0.0;
        for row in &study.rows {
            assert!(row.empirical >= last);
            last = row.empirical;
        }
        assert!(study.ks.mm >= 0.0 && study.ks.mm <= 1.0);
    }

    #[test]
    fn in_sample_fit_dominates_subsample() {
        // MM fitted on the whole sample has KS no worse than MM fitted on
        // proper subsamples, on this seeded run.
        let full = run_approx_study(&approx_config(20, 400, 400, 10)).unwrap();
        for k in [25, 50, 100] {
            let sub = run_approx_study(&approx_config(20, k, 400, 10)).unwrap();
            assert!(
                full.ks.mm <= sub.ks.mm + 1e-12,
                "full-sample KS {} vs K={k} KS {}",
                full.ks.mm,
                sub.ks.mm
            );
        }
    }

    #[test]
    fn pvalue_study_emits_requested_rows() {
        let mut config = approx_config(6, 15, 1, 11);
        config.scenario = Scenario::Pcev;
        config.n = 30;
        config.k = 15;
        config.reps = 1;
        config.n_perm = 30;
        let rows = run_pvalue_study(&config).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].p_value_tw > 0.0 && rows[0].p_value_tw < 1.0);
        assert!(rows[0].p_value_perm >= 1.0 / 31.0);
    }

    #[test]
    fn studies_are_reproducible() {
        let config = approx_config(8, 25, 150, 12);
        let a = run_approx_study(&config).unwrap();
        let b = run_approx_study(&config).unwrap();
        assert_eq!(a.ks.mm.to_bits(), b.ks.mm.to_bits());
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.grid.to_bits(), rb.grid.to_bits());
        }
    }
}
