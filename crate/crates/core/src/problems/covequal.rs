//! Two-sample covariance equality as a double Wishart problem:
//! A = n1 S1, B = n2 S2 with S_i the maximum-likelihood covariance of the
//! column-centered data and n_i = rows - 1 the Wishart degrees of freedom.

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{DoubleWishartPair, PairMeta, DEFAULT_RANK_TOLERANCE};
use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CovEqualSpec {
    x: DataMatrix,
    y: DataMatrix,
}

impl CovEqualSpec {
    pub fn new(x: DataMatrix, y: DataMatrix) -> Result<Self> {
        if x.p() != y.p() {
            return Err(Error::validation(format!(
                "X has {} columns but Y has {}",
                x.p(),
                y.p()
            )));
        }
        Ok(CovEqualSpec { x, y })
    }

    pub fn x(&self) -> &DataMatrix {
        &self.x
    }

    pub fn y(&self) -> &DataMatrix {
        &self.y
    }

    pub fn build(&self) -> Result<DoubleWishartPair> {
        self.build_with_tolerance(DEFAULT_RANK_TOLERANCE)
    }

    pub fn build_with_tolerance(&self, rank_tolerance: f64) -> Result<DoubleWishartPair> {
        let p = self.x.p();
        let (n1, n2) = (self.x.n(), self.y.n());
        let (xc, yc) = (self.x.centered(), self.y.centered());
        // A = n1 S1 = ((rows-1)/rows) Xc^T Xc, so the factor is scaled Xc.
        let fa = xc * (((n1 - 1) as f64) / n1 as f64).sqrt();
        let fb = yc * (((n2 - 1) as f64) / n2 as f64).sqrt();
        DoubleWishartPair::from_factors(
            fa,
            fb,
            rank_tolerance,
            PairMeta {
                label: "covequal".into(),
                df_a: n1 - 1,
                df_b: n2 - 1,
                p,
            },
        )
    }

    /// Pool the rows and randomly reassign n1 of them to X and n2 to Y.
    /// Group means are re-estimated at build time (the per-group centering
    /// inside the covariance estimate absorbs any common shift), so every
    /// partition -- the identity included -- is treated symmetrically and
    /// the permutation null is exact when the two samples share a
    /// distribution.
    pub fn permuted(&self, rng: &mut ChaCha8Rng) -> CovEqualSpec {
        let perm = super::random_permutation(self.x.n() + self.y.n(), rng);
        self.reassigned(&perm)
    }

    /// Deterministic reassignment by an explicit permutation of the pooled
    /// rows: the first n1 entries go to X, the rest to Y.
    pub fn reassigned(&self, perm: &[usize]) -> CovEqualSpec {
        let (n1, n2) = (self.x.n(), self.y.n());
        debug_assert_eq!(perm.len(), n1 + n2);
        let p = self.x.p();
        let (xc, yc) = (self.x.values().clone(), self.y.values().clone());
        let pooled_row = |k: usize| {
            if k < n1 {
                xc.row(k)
            } else {
                yc.row(k - n1)
            }
        };
        let new_x = DMatrix::from_fn(n1, p, |i, j| pooled_row(perm[i])[j]);
        let new_y = DMatrix::from_fn(n2, p, |i, j| pooled_row(perm[n1 + i])[j]);
        CovEqualSpec {
            x: DataMatrix::from_parts_unchecked(new_x, self.x.column_labels().to_vec()),
            y: DataMatrix::from_parts_unchecked(new_y, self.y.column_labels().to_vec()),
        }
    }
}
