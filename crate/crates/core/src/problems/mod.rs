//! Constructors for the four double Wishart test families and their
//! permutation schemes.
//!
//! Each family builds an (A, B) pair in factored form so the solver can stay
//! in the sample-size row space, and knows how to permute itself under the
//! null:
//!
//! * MANOVA — permute group labels;
//! * covariance equality — center both matrices once, pool the rows, and
//!   randomly reassign them (means are not re-estimated per permutation);
//! * CCA — permute the rows of X, keep Y fixed;
//! * PCEV — permute the rows of Y jointly, keep X and confounders fixed.

mod cca;
mod covequal;
mod manova;
mod pcev;

pub use cca::CcaSpec;
pub use covequal::CovEqualSpec;
pub use manova::ManovaSpec;
pub use pcev::{pcev_component_and_vif, PcevComponent, PcevSpec};

use crate::error::Result;
use crate::linalg::DoubleWishartPair;
use rand_chacha::ChaCha8Rng;

/// Orthonormal column basis via modified Gram-Schmidt with
/// reorthogonalization. Returns the basis and the indices of columns that
/// were (numerically) dependent on earlier ones.
pub(crate) fn orthonormal_basis(
    m: &nalgebra::DMatrix<f64>,
    tol: f64,
) -> (nalgebra::DMatrix<f64>, Vec<usize>) {
    let n = m.nrows();
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).clone_owned();
        let scale = v.norm();
        for _ in 0..2 {
            for q in &basis {
                let coeff = q.dot(&v);
                v.axpy(-coeff, q, 1.0);
            }
        }
        if v.norm() <= tol * scale.max(1e-300) {
            dependent.push(j);
        } else {
            let norm = v.norm();
            basis.push(v / norm);
        }
    }
    let mut out = nalgebra::DMatrix::zeros(n, basis.len());
    for (k, q) in basis.iter().enumerate() {
        out.set_column(k, q);
    }
    (out, dependent)
}

/// Numerical tolerance for declaring a design/projector column dependent.
pub(crate) const BASIS_TOLERANCE: f64 = 1e-10;

/// Any of the four double Wishart problem specifications.
#[derive(Debug, Clone)]
pub enum ProblemSpec {
    Manova(ManovaSpec),
    CovEqual(CovEqualSpec),
    Cca(CcaSpec),
    Pcev(PcevSpec),
}

impl ProblemSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ProblemSpec::Manova(_) => "manova",
            ProblemSpec::CovEqual(_) => "covequal",
            ProblemSpec::Cca(_) => "cca",
            ProblemSpec::Pcev(_) => "pcev",
        }
    }

    /// Construct the (A, B) pair.
    pub fn build(&self) -> Result<DoubleWishartPair> {
        match self {
            ProblemSpec::Manova(s) => s.build(),
            ProblemSpec::CovEqual(s) => s.build(),
            ProblemSpec::Cca(s) => s.build(),
            ProblemSpec::Pcev(s) => s.build(),
        }
    }

    /// Build with a non-default rank tolerance.
    pub fn build_with_tolerance(&self, rank_tolerance: f64) -> Result<DoubleWishartPair> {
        match self {
            ProblemSpec::Manova(s) => s.build_with_tolerance(rank_tolerance),
            ProblemSpec::CovEqual(s) => s.build_with_tolerance(rank_tolerance),
            ProblemSpec::Cca(s) => s.build_with_tolerance(rank_tolerance),
            ProblemSpec::Pcev(s) => s.build_with_tolerance(rank_tolerance),
        }
    }

    /// The family-specific permutation scheme, drawing from `rng`.
    pub fn permuted(&self, rng: &mut ChaCha8Rng) -> ProblemSpec {
        match self {
            ProblemSpec::Manova(s) => ProblemSpec::Manova(s.permuted(rng)),
            ProblemSpec::CovEqual(s) => ProblemSpec::CovEqual(s.permuted(rng)),
            ProblemSpec::Cca(s) => ProblemSpec::Cca(s.permuted(rng)),
            ProblemSpec::Pcev(s) => ProblemSpec::Pcev(s.permuted(rng)),
        }
    }
}

/// Random permutation of 0..n via Fisher-Yates.
pub(crate) fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::Rng;
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}
