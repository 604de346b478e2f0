//! PCEV as a double Wishart problem: with H the hat matrix of the full
//! design [1 | X | confounders] and H0 that of [1 | confounders],
//! B = Y^T (H - H0) Y is the model scatter attributable to X and
//! A = Y^T (I - H) Y the residual scatter. The largest root is
//! max_w R^2(w) = max_w (w^T B w) / (w^T (A + B) w) on the restricted
//! subspace, and the component scores expose per-response importance.

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    largest_root_with_vector, DoubleWishartPair, LargestRoot, PairMeta, DEFAULT_RANK_TOLERANCE,
};
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct PcevSpec {
    y: DataMatrix,
    x: DataMatrix,
    confounders: Option<DataMatrix>,
}

impl PcevSpec {
    pub fn new(y: DataMatrix, x: DataMatrix, confounders: Option<DataMatrix>) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::validation(format!(
                "Y has {} rows but X has {}",
                y.n(),
                x.n()
            )));
        }
        if let Some(c) = &confounders {
            if c.n() != y.n() {
                return Err(Error::validation(format!(
                    "Y has {} rows but the confounders have {}",
                    y.n(),
                    c.n()
                )));
            }
        }
        let c = confounders.as_ref().map_or(0, |c| c.p());
        if x.p() + c + 1 >= y.n() {
            return Err(Error::validation(format!(
                "design is saturated: q + c + 1 = {} must be below n = {}",
                x.p() + c + 1,
                y.n()
            )));
        }
        Ok(PcevSpec { y, x, confounders })
    }

    pub fn y(&self) -> &DataMatrix {
        &self.y
    }

    pub fn x(&self) -> &DataMatrix {
        &self.x
    }

    pub fn confounders(&self) -> Option<&DataMatrix> {
        self.confounders.as_ref()
    }

    /// Orthonormal bases of the null design [1 | confounders] and of the
    /// X-attributable complement within the full design.
    fn design_bases(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let n = self.y.n();
        let c = self.confounders.as_ref().map_or(0, |c| c.p());
        let mut null_design = DMatrix::zeros(n, 1 + c);
        for i in 0..n {
            null_design[(i, 0)] = 1.0;
        }
        if let Some(conf) = &self.confounders {
            null_design
                .view_mut((0, 1), (n, c))
                .copy_from(conf.values());
        }
        let (q0, dep0) = super::orthonormal_basis(&null_design, super::BASIS_TOLERANCE);
        if !dep0.is_empty() {
            return Err(Error::validation(
                "confounder design is rank deficient (a confounder is constant \
                 or a combination of the others)",
            ));
        }
        // X residualized against [1 | confounders]; its basis spans H - H0.
        let x_resid = {
            let xv = self.x.values();
            let coords = q0.transpose() * xv;
            xv - &q0 * coords
        };
        let (q_delta, dep_x) = super::orthonormal_basis(&x_resid, super::BASIS_TOLERANCE);
        if !dep_x.is_empty() {
            let names: Vec<&str> = dep_x
                .iter()
                .map(|&j| self.x.column_labels()[j].as_str())
                .collect();
            return Err(Error::validation(format!(
                "design is rank deficient; covariate columns dependent on the \
                 rest of the design: {}",
                names.join(", ")
            )));
        }
        Ok((q0, q_delta))
    }

    pub fn build(&self) -> Result<DoubleWishartPair> {
        self.build_with_tolerance(DEFAULT_RANK_TOLERANCE)
    }

    pub fn build_with_tolerance(&self, rank_tolerance: f64) -> Result<DoubleWishartPair> {
        let (q0, q_delta) = self.design_bases()?;
        let yv = self.y.values();
        let n = self.y.n();
        let p = self.y.p();
        let q = self.x.p();
        let c = self.confounders.as_ref().map_or(0, |c| c.p());

        // B factor: Q_delta^T Y (q x p); A factor: residuals of Y against the
        // full design; sum factor: Y residualized against [1 | confounders].
        let b_factor = q_delta.transpose() * yv;
        let y_null_resid = yv - &q0 * (q0.transpose() * yv);
        let a_factor = &y_null_resid - &q_delta * (q_delta.transpose() * &y_null_resid);
        DoubleWishartPair::from_factors(
            a_factor,
            b_factor,
            rank_tolerance,
            PairMeta {
                label: "pcev".into(),
                df_a: n - q - c - 1,
                df_b: q,
                p,
            },
        )
    }

    /// Permute the rows of Y jointly, keeping X and confounders fixed.
    pub fn permuted(&self, rng: &mut ChaCha8Rng) -> PcevSpec {
        let perm = super::random_permutation(self.y.n(), rng);
        self.with_y_rows(&perm)
    }

    /// Deterministic row permutation of Y.
    pub fn with_y_rows(&self, perm: &[usize]) -> PcevSpec {
        PcevSpec {
            y: self.y.permuted_rows(perm),
            x: self.x.clone(),
            confounders: self.confounders.clone(),
        }
    }
}

/// The component attaining the largest root, its scores, and per-response
/// variable importance.
#[derive(Debug, Clone)]
pub struct PcevComponent {
    pub root: LargestRoot,
    /// Unit p-vector in the original response space.
    pub weights: DVector<f64>,
    /// Component scores of the confounder-adjusted responses (length n).
    pub scores: DVector<f64>,
    /// Pearson correlation of each raw response column with the scores.
    pub vif: Vec<f64>,
    /// Indices of zero-variance response columns whose VIF was set to 0.
    pub zero_variance_columns: Vec<usize>,
}

/// Compute the maximizing component and variable importance factors for a
/// PCEV problem whose pair was built by [`PcevSpec::build`].
pub fn pcev_component_and_vif(spec: &PcevSpec, pair: &DoubleWishartPair) -> Result<PcevComponent> {
    let (root, weights) = largest_root_with_vector(pair)?;
    let (q0, _) = spec.design_bases()?;
    let yv = spec.y().values();
    let y_adjusted = yv - &q0 * (q0.transpose() * yv);
    let scores = &y_adjusted * &weights;

    let n = spec.y().n();
    let score_mean = scores.sum() / n as f64;
    let score_dev: DVector<f64> = scores.map(|v| v - score_mean);
    let score_norm = score_dev.norm();
    let mut vif = Vec::with_capacity(spec.y().p());
    let mut zero_variance_columns = Vec::new();
    for j in 0..spec.y().p() {
        let col = yv.column(j);
        let mean = col.sum() / n as f64;
        let dev: DVector<f64> = DVector::from_fn(n, |i, _| col[i] - mean);
        // numerically constant column: centered norm at round-off scale
        if dev.norm() <= 1e-12 * col.norm().max(1e-300) || score_norm <= 1e-300 {
            zero_variance_columns.push(j);
            vif.push(0.0);
        } else {
            vif.push((dev.dot(&score_dev) / (dev.norm() * score_norm)).clamp(-1.0, 1.0));
        }
    }
    Ok(PcevComponent {
        root,
        weights,
        scores,
        vif,
        zero_variance_columns,
    })
}
