//! Valid p-values for high-dimensional multivariate tests.
//!
//! Several classical multivariate procedures — one-way MANOVA, the test of
//! covariance equality, CCA, and PCEV — reduce to the largest root lambda of
//! the determinantal equation det(B - lambda (A + B)) = 0 for a pair of
//! Wishart-type scatter matrices. When the variable count exceeds the sample
//! size the pair is singular and the classical null distributions no longer
//! apply. This crate estimates the null distribution empirically: it draws a
//! small number K of permutation replicates, computes their largest roots on
//! the logit scale, fits a location-scale family of the Tracy-Widom
//! distribution of order 1, and reads the p-value off the fitted upper tail.
//! A hundred permutations typically buy p-value resolution that would
//! otherwise need millions.
//!
//! ```
//! use wishroot::nalgebra::DMatrix;
//! use wishroot::{run_estimator, DataMatrix, EstimatorConfig, FitMethod, PcevSpec, ProblemSpec};
//!
//! // 24 observations, 8 responses, one balanced binary covariate.
//! let y = DataMatrix::unlabeled(DMatrix::from_fn(24, 8, |i, j| {
//!     ((i * 31 + j * 17) % 13) as f64 - 6.0
//! }))?;
//! let x = DataMatrix::unlabeled(DMatrix::from_fn(24, 1, |i, _| (i % 2) as f64))?;
//! let spec = ProblemSpec::Pcev(PcevSpec::new(y, x, None)?);
//!
//! let result = run_estimator(&spec, &EstimatorConfig::new(15, FitMethod::Mm, 42))?;
//! assert!(result.p_value_tw > 0.0 && result.p_value_tw < 1.0);
//! # Ok::<(), wishroot::Error>(())
//! ```
//!
//! Modules:
//! * [`linalg`] — pair representations and the rank-truncated largest-root
//!   solver;
//! * [`tw`] — TW(1) CDF/density/quantiles from an embedded high-precision
//!   table, plus the closed-form location/scale of the non-singular regime;
//! * [`fitting`] — method-of-moments, maximum-likelihood and
//!   Anderson-Darling fits of the location-scale family;
//! * [`problems`] — the four test families and their permutation schemes;
//! * [`shrinkage`] — linear shrinkage of A toward a scaled identity;
//! * [`estimator`] — the end-to-end pipeline and reference permutation
//!   p-values;
//! * [`sim`] — scenario generators and study runners;
//! * [`rng`] — the deterministic stream-derivation contract.

pub use nalgebra;

pub mod data;
pub mod error;
pub mod estimator;
pub mod fitting;
pub mod linalg;
pub mod problems;
pub mod rng;
pub mod shrinkage;
pub mod sim;
pub mod tw;

pub use data::DataMatrix;
pub use error::{Error, Result};
pub use estimator::{permutation_pvalue, run_estimator, EstimatorConfig, TestResult};
pub use fitting::RootSample;
pub use linalg::{
    all_roots, largest_root, truncated_evd, DoubleWishartPair, LargestRoot, PairMeta, PairSide,
};
pub use problems::{
    pcev_component_and_vif, CcaSpec, CovEqualSpec, ManovaSpec, PcevComponent, PcevSpec,
    ProblemSpec,
};
pub use shrinkage::{build_shrunk_pair, ledoit_wolf, ShrinkageEstimate};
pub use sim::{
    gen_scenario_data, gen_wishart, run_approx_study, run_pvalue_study, ApproxStudy, KsByMethod,
    PvalueRow, Scenario, ScenarioConfig,
};
pub use tw::{
    johnstone_location_scale, tw_cdf, tw_moments, tw_pdf, tw_quantile, FitMethod, TwLocationScale,
};
