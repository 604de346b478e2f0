//! The permutation-calibrated Tracy-Widom estimator: permutation largest
//! roots -> logit scale -> location-scale fit -> upper-tail p-value, plus a
//! reference pure-permutation p-value.
//!
//! Determinism contract: permutation replicate k draws from the stream
//! derived from (seed, k), so a given (spec, K, seed, method) quadruple
//! produces bit-identical results at any parallelism degree. When a
//! reference permutation p-value over N >= K permutations is requested, the
//! first K replicate streams are shared between the fit and the reference
//! count ("same seed lineage").

use crate::error::{Error, Result};
use crate::fitting::{self, RootSample};
use crate::linalg::{self, DoubleWishartPair, LargestRoot};
use crate::problems::ProblemSpec;
use crate::rng::replicate_rng;
use crate::shrinkage;
use crate::tw::{FitMethod, TwLocationScale};
use rayon::prelude::*;

/// Fraction of clipped roots above which the null is declared degenerate.
const MAX_CLIPPED_FRACTION: f64 = 0.2;

/// Options for [`run_estimator`].
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// Number of permutation replicates used for the fit.
    pub k: usize,
    pub fit_method: FitMethod,
    pub seed: u64,
    /// Replace A with its linearly shrunk version in every replicate.
    pub shrinkage: bool,
    /// Also compute the add-one permutation p-value over this many
    /// replicates (sharing the first K streams).
    pub n_perm_reference: Option<usize>,
    /// Relative eigenvalue cutoff for rank truncation.
    pub rank_tolerance: f64,
}

impl EstimatorConfig {
    pub fn new(k: usize, fit_method: FitMethod, seed: u64) -> Self {
        EstimatorConfig {
            k,
            fit_method,
            seed,
            shrinkage: false,
            n_perm_reference: None,
            rank_tolerance: linalg::DEFAULT_RANK_TOLERANCE,
        }
    }
}

/// Everything a test run produces.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TestResult {
    pub problem_label: String,
    pub lambda_obs: f64,
    pub logit_obs: f64,
    /// Upper-tail p-value from the fitted location-scale TW(1) family.
    pub p_value_tw: f64,
    /// Add-one permutation p-value, when a reference was requested.
    pub p_value_perm: Option<f64>,
    pub fit: TwLocationScale,
    /// Requested number of fitting permutations (fitted + excluded).
    pub k: usize,
    pub n_perm_reference: Option<usize>,
    pub seed: u64,
    pub shrinkage_used: bool,
    /// Clipped roots dropped from the fit.
    pub excluded_roots: usize,
    pub effective_rank: usize,
}

fn build_pair(spec: &ProblemSpec, config: &EstimatorConfig) -> Result<DoubleWishartPair> {
    let pair = spec.build_with_tolerance(config.rank_tolerance)?;
    if config.shrinkage {
        shrink_pair(pair)
    } else {
        Ok(pair)
    }
}

/// Shrink the A side using its own Gram factor as the centered data.
fn shrink_pair(pair: DoubleWishartPair) -> Result<DoubleWishartPair> {
    let factor = match pair.a() {
        linalg::PairSide::Gram { factor } => factor.clone(),
        linalg::PairSide::Dense(_) => {
            return Err(Error::validation(
                "shrinkage needs the factored form of A; this pair is dense",
            ))
        }
    };
    let data = crate::data::DataMatrix::from_parts_unchecked(
        factor,
        (1..=pair.p()).map(|j| format!("v{j}")).collect(),
    );
    shrinkage::build_shrunk_pair(&pair, &data)
}

fn permute_root(
    spec: &ProblemSpec,
    config: &EstimatorConfig,
    index: u64,
) -> Result<LargestRoot> {
    let mut rng = replicate_rng(config.seed, index);
    let permuted = spec.permuted(&mut rng);
    let pair = build_pair(&permuted, config)?;
    linalg::largest_root(&pair)
}

/// Run the full estimator pipeline on a problem specification.
pub fn run_estimator(spec: &ProblemSpec, config: &EstimatorConfig) -> Result<TestResult> {
    if config.k < 10 {
        return Err(Error::validation(format!(
            "need at least 10 fitting permutations, got {}",
            config.k
        )));
    }
    if config.shrinkage && matches!(spec, ProblemSpec::Cca(_)) {
        return Err(Error::validation(
            "shrinkage is not supported for CCA (A is a projected scatter, \
             not an explicit covariance)",
        ));
    }

    let pair_obs = build_pair(spec, config)?;
    let obs = linalg::largest_root(&pair_obs)?;

    let total = config.k.max(config.n_perm_reference.unwrap_or(0));
    let roots: Vec<LargestRoot> = (0..total as u64)
        .into_par_iter()
        .map(|i| permute_root(spec, config, i))
        .collect::<Result<Vec<_>>>()?;

    let fit_roots = &roots[..config.k];
    let excluded_roots = fit_roots.iter().filter(|r| r.clipped).count();
    if excluded_roots as f64 > MAX_CLIPPED_FRACTION * config.k as f64 {
        return Err(Error::DegenerateNull {
            clipped: excluded_roots,
            total: config.k,
        });
    }
    let logits: Vec<f64> = fit_roots
        .iter()
        .filter(|r| !r.clipped)
        .map(|r| r.logit_lambda)
        .collect();
    let sample = RootSample::new(logits, excluded_roots)?;
    let fit = fitting::fit(config.fit_method, &sample)?;

    let p_value_tw = fit.upper_tail(obs.logit_lambda)?;
    let p_value_perm = config
        .n_perm_reference
        .map(|n| add_one_pvalue(&roots[..n], obs.lambda));

    Ok(TestResult {
        problem_label: spec.label().to_string(),
        lambda_obs: obs.lambda,
        logit_obs: obs.logit_lambda,
        p_value_tw,
        p_value_perm,
        fit,
        k: config.k,
        n_perm_reference: config.n_perm_reference,
        seed: config.seed,
        shrinkage_used: config.shrinkage,
        excluded_roots,
        effective_rank: obs.effective_rank,
    })
}

fn add_one_pvalue(roots: &[LargestRoot], lambda_obs: f64) -> f64 {
    let exceed = roots.iter().filter(|r| r.lambda >= lambda_obs).count();
    (1 + exceed) as f64 / (roots.len() + 1) as f64
}

/// Pure permutation p-value with the add-one estimator (never exactly 0).
pub fn permutation_pvalue(spec: &ProblemSpec, n_perm: usize, seed: u64) -> Result<f64> {
    if n_perm < 1 {
        return Err(Error::validation("need at least one permutation"));
    }
    let config = EstimatorConfig::new(10, FitMethod::Mm, seed);
    let pair_obs = spec.build_with_tolerance(config.rank_tolerance)?;
    let obs = linalg::largest_root(&pair_obs)?;
    let roots: Vec<LargestRoot> = (0..n_perm as u64)
        .into_par_iter()
        .map(|i| permute_root(spec, &config, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(add_one_pvalue(&roots, obs.lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataMatrix;
    use crate::problems::{CcaSpec, PcevSpec};
    use crate::tw;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn data(n: usize, p: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::unlabeled(DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng)))
            .unwrap()
    }

    fn null_pcev(seed: u64) -> ProblemSpec {
        let n = 40;
        let x = DataMatrix::unlabeled(DMatrix::from_fn(n, 1, |i, _| {
            if i < n / 2 {
                0.0
            } else {
                1.0
            }
        }))
        .unwrap();
        ProblemSpec::Pcev(PcevSpec::new(data(n, 8, seed), x, None).unwrap())
    }

    #[test]
    fn p_value_at_the_fitted_center() {
        // When logit(lambda_obs) equals mu-hat, p = 1 - F(0) ~ 0.168.
        let spec = null_pcev(1);
        let config = EstimatorConfig::new(60, FitMethod::Mm, 7);
        let result = run_estimator(&spec, &config).unwrap();
        let p_at_mu = result.fit.upper_tail(result.fit.mu).unwrap();
        let expected = 1.0 - tw::tw_cdf(0.0).unwrap();
        assert!((p_at_mu - expected).abs() < 2e-3);
    }

    #[test]
    fn left_tail_p_value_saturates() {
        let spec = null_pcev(2);
        let config = EstimatorConfig::new(40, FitMethod::Mm, 3);
        let result = run_estimator(&spec, &config).unwrap();
        // standardized score of -10 is far below every permutation root
        let low = result.fit.mu - 10.0 * result.fit.sigma;
        let p = result.fit.upper_tail(low).unwrap();
        assert!(p >= 1.0 - 1e-6);
    }

    #[test]
    fn seed_determinism_across_thread_counts() {
        let spec = null_pcev(3);
        let mut config = EstimatorConfig::new(30, FitMethod::Mm, 11);
        config.n_perm_reference = Some(50);
        let r1 = run_estimator(&spec, &config).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let r2 = pool.install(|| run_estimator(&spec, &config).unwrap());
        assert_eq!(r1.p_value_tw.to_bits(), r2.p_value_tw.to_bits());
        assert_eq!(r1.p_value_perm, r2.p_value_perm);
        assert_eq!(r1.fit.mu.to_bits(), r2.fit.mu.to_bits());
    }

    #[test]
    fn accounting_of_excluded_roots() {
        let spec = null_pcev(4);
        let config = EstimatorConfig::new(50, FitMethod::Mm, 13);
        let result = run_estimator(&spec, &config).unwrap();
        assert_eq!(result.k, result.fit.sample_size + result.excluded_roots);
    }

    #[test]
    fn monotone_in_lambda_for_fixed_fit() {
        let spec = null_pcev(5);
        let config = EstimatorConfig::new(30, FitMethod::Mm, 17);
        let result = run_estimator(&spec, &config).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let x = result.fit.mu + (i as f64 / 49.0 * 12.0 - 6.0) * result.fit.sigma;
            let p = result.fit.upper_tail(x).unwrap();
            assert!(p < last, "p-value must strictly decrease");
            last = p;
        }
    }

    #[test]
    fn permutation_pvalue_extremes() {
        // lambda_obs above all replicates -> 1/(n+1); below all -> 1.
        let fake_roots: Vec<LargestRoot> = (0..499)
            .map(|i| LargestRoot {
                lambda: 0.1 + (i as f64) * 1e-4,
                logit_lambda: 0.0,
                effective_rank: 1,
                clipped: false,
            })
            .collect();
        assert_eq!(add_one_pvalue(&fake_roots, 0.9), 1.0 / 500.0);
        assert_eq!(add_one_pvalue(&fake_roots, 0.05), 1.0);
    }

    #[test]
    fn shared_lineage_between_fit_and_reference() {
        let spec = null_pcev(6);
        let mut config = EstimatorConfig::new(20, FitMethod::Mm, 23);
        config.n_perm_reference = Some(20);
        let result = run_estimator(&spec, &config).unwrap();
        let standalone = permutation_pvalue(&spec, 20, 23).unwrap();
        assert_eq!(result.p_value_perm.unwrap(), standalone);
    }

    #[test]
    fn shrinkage_with_cca_is_rejected() {
        let spec = ProblemSpec::Cca(CcaSpec::new(data(20, 30, 7), data(20, 3, 8)).unwrap());
        let mut config = EstimatorConfig::new(20, FitMethod::Mm, 29);
        config.shrinkage = true;
        assert!(matches!(
            run_estimator(&spec, &config),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn small_k_is_rejected() {
        let spec = null_pcev(8);
        let config = EstimatorConfig::new(9, FitMethod::Mm, 31);
        assert!(run_estimator(&spec, &config).is_err());
    }
}
