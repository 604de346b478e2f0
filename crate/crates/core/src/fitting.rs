//! Fit the location-scale TW(1) family to a sample of logit-transformed
//! largest roots.
//!
//! Four strategies: method of moments (MM), maximum likelihood (MLE), and
//! maximum goodness-of-fit minimizing the Anderson-Darling statistic (AD) or
//! its right-tail-weighted variant (ADR). The optimized methods run a
//! deterministic Nelder-Mead in (mu, ln sigma) space warm-started at the MM
//! estimate, so identical samples always produce identical fits.

use crate::error::{Error, Result};
use crate::tw::{self, FitMethod, TwLocationScale, TW1_MEAN, TW1_VARIANCE};

/// Probabilities are clamped to this band inside the AD/ADR logarithms.
const Z_CLAMP: f64 = 1e-12;

/// Nelder-Mead convergence tolerance on the objective spread.
const NM_TOLERANCE: f64 = 1e-6;

/// Nelder-Mead iteration budget.
const NM_MAX_ITER: usize = 500;

/// A sample of logit-scale largest roots ready for fitting, sorted
/// ascending. `excluded_count` records clipped roots dropped upstream.
#[derive(Debug, Clone)]
pub struct RootSample {
    logit_roots: Vec<f64>,
    excluded_count: usize,
}

impl RootSample {
    pub fn new(mut logit_roots: Vec<f64>, excluded_count: usize) -> Result<Self> {
        if logit_roots.len() < 10 {
            return Err(Error::validation(format!(
                "need at least 10 roots to fit, got {}",
                logit_roots.len()
            )));
        }
        if logit_roots.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("logit roots must all be finite"));
        }
        logit_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(RootSample {
            logit_roots,
            excluded_count,
        })
    }

    pub fn k(&self) -> usize {
        self.logit_roots.len()
    }

    pub fn excluded_count(&self) -> usize {
        self.excluded_count
    }

    /// Ascending logit roots.
    pub fn logit_roots(&self) -> &[f64] {
        &self.logit_roots
    }

    fn mean(&self) -> f64 {
        self.logit_roots.iter().sum::<f64>() / self.k() as f64
    }

    /// Unbiased (K-1 denominator) sample variance.
    fn variance(&self) -> f64 {
        let mean = self.mean();
        let k = self.k() as f64;
        self.logit_roots
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / (k - 1.0)
    }
}

/// Dispatch on the fit method.
pub fn fit(method: FitMethod, sample: &RootSample) -> Result<TwLocationScale> {
    match method {
        FitMethod::Mm => fit_mm(sample),
        FitMethod::Mle => fit_mle(sample),
        FitMethod::Ad => fit_ad(sample),
        FitMethod::Adr => fit_adr(sample),
    }
}

/// Method of moments: equate sample mean and variance to those of
/// sigma TW(1) + mu.
pub fn fit_mm(sample: &RootSample) -> Result<TwLocationScale> {
    let var = sample.variance();
    if !(var > 0.0) {
        return Err(Error::degenerate(
            "sample variance is zero; cannot fit a scale",
        ));
    }
    let sigma = (var / TW1_VARIANCE).sqrt();
    let mu = sample.mean() - sigma * TW1_MEAN;
    TwLocationScale::new(mu, sigma, FitMethod::Mm, sample.k(), 0.0)
}

/// Maximum likelihood via Nelder-Mead on the negative log-likelihood.
pub fn fit_mle(sample: &RootSample) -> Result<TwLocationScale> {
    let nll = |mu: f64, sigma: f64| -> f64 {
        let mut acc = sample.k() as f64 * sigma.ln();
        for &x in sample.logit_roots() {
            let dens = tw::tw_pdf((x - mu) / sigma).unwrap_or(0.0);
            acc -= dens.max(1e-300).ln();
        }
        acc
    };
    let fitted = optimize(sample, "mle", nll)?;
    TwLocationScale::new(
        fitted.mu,
        fitted.sigma,
        FitMethod::Mle,
        sample.k(),
        -fitted.objective, // store the attained log-likelihood
    )
}

/// Maximum goodness-of-fit with the Anderson-Darling statistic.
pub fn fit_ad(sample: &RootSample) -> Result<TwLocationScale> {
    let obj = |mu: f64, sigma: f64| ad_statistic(&standardized_cdf(sample, mu, sigma));
    let fitted = optimize(sample, "ad", obj)?;
    TwLocationScale::new(fitted.mu, fitted.sigma, FitMethod::Ad, sample.k(), fitted.objective)
}

/// Maximum goodness-of-fit with the right-tail-weighted Anderson-Darling
/// statistic.
pub fn fit_adr(sample: &RootSample) -> Result<TwLocationScale> {
    let obj = |mu: f64, sigma: f64| adr_statistic(&standardized_cdf(sample, mu, sigma));
    let fitted = optimize(sample, "adr", obj)?;
    TwLocationScale::new(fitted.mu, fitted.sigma, FitMethod::Adr, sample.k(), fitted.objective)
}

/// z_i = F((x_(i) - mu) / sigma) on the ascending order statistics, clamped
/// away from 0 and 1.
fn standardized_cdf(sample: &RootSample, mu: f64, sigma: f64) -> Vec<f64> {
    sample
        .logit_roots()
        .iter()
        .map(|&x| {
            tw::tw_cdf((x - mu) / sigma)
                .unwrap_or(0.5)
                .clamp(Z_CLAMP, 1.0 - Z_CLAMP)
        })
        .collect()
}

/// Anderson-Darling statistic for ascending probabilities z:
/// A^2 = -K - (1/K) sum_i (2i - 1) [ln z_i + ln(1 - z_{K+1-i})].
pub fn ad_statistic(z: &[f64]) -> f64 {
    let k = z.len();
    let kf = k as f64;
    let mut acc = 0.0;
    for i in 1..=k {
        let weight = (2 * i - 1) as f64;
        acc += weight * (z[i - 1].ln() + (1.0 - z[k - i]).ln_clamped());
    }
    -kf - acc / kf
}

/// Right-tail-weighted variant:
/// A_R^2 = K/2 - 2 sum_i z_i - (1/K) sum_i (2i - 1) ln(1 - z_{K+1-i}).
pub fn adr_statistic(z: &[f64]) -> f64 {
    let k = z.len();
    let kf = k as f64;
    let sum_z: f64 = z.iter().sum();
    let mut acc = 0.0;
    for i in 1..=k {
        let weight = (2 * i - 1) as f64;
        acc += weight * (1.0 - z[k - i]).ln_clamped();
    }
    kf / 2.0 - 2.0 * sum_z - acc / kf
}

/// ln clamped away from zero; keeps the statistic expressions readable.
trait LnClamped {
    fn ln_clamped(self) -> f64;
}

impl LnClamped for f64 {
    fn ln_clamped(self) -> f64 {
        self.max(Z_CLAMP).ln()
    }
}

struct Fitted {
    mu: f64,
    sigma: f64,
    objective: f64,
}

/// Deterministic Nelder-Mead in (mu, ln sigma), warm-started at the MM
/// estimate. Fails over to a FitFailure error carrying the MM fallback when
/// the simplex does not contract within the iteration budget.
fn optimize(
    sample: &RootSample,
    method: &'static str,
    objective: impl Fn(f64, f64) -> f64,
) -> Result<Fitted> {
    let mm = fit_mm(sample)?;
    let f = |p: [f64; 2]| objective(p[0], p[1].exp());
    let start = [mm.mu, mm.sigma.ln()];
    let mut simplex = [
        start,
        [start[0] + 0.1 * mm.sigma, start[1]],
        [start[0], start[1] + 0.1],
    ];
    let mut values = simplex.map(f);

    let mut iterations = 0;
    loop {
        // order: best, middle, worst
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let (best, mid, worst) = (idx[0], idx[1], idx[2]);
        if (values[worst] - values[best]).abs() <= NM_TOLERANCE {
            let p = simplex[best];
            return Ok(Fitted {
                mu: p[0],
                sigma: p[1].exp(),
                objective: values[best],
            });
        }
        if iterations >= NM_MAX_ITER {
            return Err(Error::FitFailure {
                method,
                iterations,
                fallback: Box::new(mm),
            });
        }
        iterations += 1;

        let centroid = [
            (simplex[best][0] + simplex[mid][0]) / 2.0,
            (simplex[best][1] + simplex[mid][1]) / 2.0,
        ];
        let reflect = |c: f64, w: f64| c + (c - w);
        let refl = [
            reflect(centroid[0], simplex[worst][0]),
            reflect(centroid[1], simplex[worst][1]),
        ];
        let f_refl = f(refl);
        if f_refl < values[best] {
            // expansion
            let exp_pt = [
                centroid[0] + 2.0 * (centroid[0] - simplex[worst][0]),
                centroid[1] + 2.0 * (centroid[1] - simplex[worst][1]),
            ];
            let f_exp = f(exp_pt);
            if f_exp < f_refl {
                simplex[worst] = exp_pt;
                values[worst] = f_exp;
            } else {
                simplex[worst] = refl;
                values[worst] = f_refl;
            }
        } else if f_refl < values[mid] {
            simplex[worst] = refl;
            values[worst] = f_refl;
        } else {
            // contraction
            let contr = [
                centroid[0] + 0.5 * (simplex[worst][0] - centroid[0]),
                centroid[1] + 0.5 * (simplex[worst][1] - centroid[1]),
            ];
            let f_contr = f(contr);
            if f_contr < values[worst] {
                simplex[worst] = contr;
                values[worst] = f_contr;
            } else {
                // shrink toward the best vertex
                for i in [mid, worst] {
                    simplex[i] = [
                        simplex[best][0] + 0.5 * (simplex[i][0] - simplex[best][0]),
                        simplex[best][1] + 0.5 * (simplex[i][1] - simplex[best][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
}
