//! Linear shrinkage of a sample covariance toward a scaled identity and the
//! shrunk double Wishart variant.
//!
//! The estimator is the optimal linear combination rho1 I + rho2 S under
//! expected squared Frobenius loss, with all norms taken in the normalized
//! inner product <A, B> = tr(A B^T) / p:
//!
//!   S    = (1/n) sum_k x_k x_k^T          (centered rows, 1/n divisor)
//!   m    = <S, I>
//!   d^2  = ||S - m I||^2
//!   b^2  = min( (1/n^2) sum_k ||x_k x_k^T - S||^2 , d^2 )
//!   a^2  = d^2 - b^2
//!   S*   = (b^2/d^2) m I + (a^2/d^2) S

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::DoubleWishartPair;
use nalgebra::DMatrix;

/// Output of [`ledoit_wolf`]: the shrunk covariance plus the estimated
/// shrinkage quantities.
#[derive(Debug, Clone)]
pub struct ShrinkageEstimate {
    /// The shrunk covariance S*.
    pub s_star: DMatrix<f64>,
    /// m = <S, I>, the scale of the identity target.
    pub m_hat: f64,
    /// d^2 = ||S - m I||^2.
    pub d2_hat: f64,
    /// b^2, the (truncated) estimate of the sampling error ||S - Sigma||^2.
    pub b2_hat: f64,
    /// a^2 = d^2 - b^2.
    pub a2_hat: f64,
    /// Shrinkage intensity b^2 / d^2 in [0, 1].
    pub intensity: f64,
    /// True when d^2 = 0 (the sample scatter is exactly spherical).
    pub degenerate: bool,
    /// Estimator conventions baked into this value.
    pub provenance: &'static str,
}

/// Convention note recorded on every estimate: rows are centered by their
/// sample column means and the covariance uses the 1/n divisor.
pub const LW_PROVENANCE: &str = "centered rows, 1/n divisor, normalized trace inner product";

/// Normalized inner product <A, B> = tr(A B^T) / p for symmetric matrices.
fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>() / a.ncols() as f64
}

/// Linear shrinkage estimate of the covariance of `data`.
pub fn ledoit_wolf(data: &DataMatrix) -> ShrinkageEstimate {
    let n = data.n();
    let p = data.p();
    let x = data.centered();
    let s = x.transpose() * &x / n as f64;

    let m_hat = s.trace() / p as f64;
    let mut d2_hat = inner(&s, &s) - m_hat * m_hat;
    // Guard tiny negative round-off.
    if d2_hat < 0.0 {
        d2_hat = 0.0;
    }

    // b_bar^2 = (1/n^2) sum_k ||x_k x_k^T - S||^2
    //         = (1/n^2) [ sum_k (x_k . x_k)^2 / p - 2 sum_k x_k^T S x_k / p ] + <S,S>/n
    let mut sum_sq = 0.0;
    let mut sum_quad = 0.0;
    for k in 0..n {
        let row = x.row(k).transpose();
        let norm2 = row.dot(&row);
        sum_sq += norm2 * norm2;
        let srow = &s * &row;
        sum_quad += row.dot(&srow);
    }
    let s_norm2 = inner(&s, &s);
    let b_bar2 =
        (sum_sq / p as f64 - 2.0 * sum_quad / p as f64) / (n * n) as f64 + s_norm2 / n as f64;
    let b2_hat = b_bar2.max(0.0).min(d2_hat);
    let a2_hat = d2_hat - b2_hat;

    if d2_hat == 0.0 {
        let s_star = DMatrix::identity(p, p) * m_hat;
        return ShrinkageEstimate {
            s_star,
            m_hat,
            d2_hat,
            b2_hat: 0.0,
            a2_hat: 0.0,
            intensity: 1.0,
            degenerate: true,
            provenance: LW_PROVENANCE,
        };
    }

    let intensity = b2_hat / d2_hat;
    let s_star = compose_s_star(&s, m_hat, d2_hat, b2_hat);
    ShrinkageEstimate {
        s_star,
        m_hat,
        d2_hat,
        b2_hat,
        a2_hat,
        intensity,
        degenerate: false,
        provenance: LW_PROVENANCE,
    }
}

/// S* = (b2/d2) m I + ((d2 - b2)/d2) S.
pub(crate) fn compose_s_star(s: &DMatrix<f64>, m_hat: f64, d2: f64, b2: f64) -> DMatrix<f64> {
    let p = s.ncols();
    let mut out = s * ((d2 - b2) / d2);
    let ridge = (b2 / d2) * m_hat;
    for i in 0..p {
        out[(i, i)] += ridge;
    }
    out
}

/// Replace A with the linearly shrunk A* = n S*, where S* is the shrinkage
/// estimate from `data_for_a` (the centered data whose Gram matrix produced
/// A, so intensity 0 returns A exactly) and n is its row count.
pub fn build_shrunk_pair(
    pair: &DoubleWishartPair,
    data_for_a: &DataMatrix,
) -> Result<DoubleWishartPair> {
    if data_for_a.p() != pair.p() {
        return Err(Error::validation(format!(
            "shrinkage data has {} columns but the pair dimension is {}",
            data_for_a.p(),
            pair.p()
        )));
    }
    let est = ledoit_wolf(data_for_a);
    let a_star = est.s_star * data_for_a.n() as f64;
    pair.replace_a_dense(a_star, " (shrunk A)")
}
