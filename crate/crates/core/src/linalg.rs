//! Dense symmetric linear algebra and the rank-truncated largest-root solver
//! for singular double Wishart problems.
//!
//! The largest root is the biggest lambda solving det(B - lambda (A + B)) = 0
//! restricted to the column space of A. With (U, D) the truncated
//! eigendecomposition of A, the restricted problem is the classical one:
//! theta ranges over the spectrum of C = D^{-1/2} U^T B U D^{-1/2} (the Roy
//! pencil with the pseudo-inverse of A) and lambda = theta / (1 + theta).
//! Restricting to col(A) rather than col(A+B) is what keeps the singular
//! regime non-degenerate: any direction of B sticking out of col(A) would
//! otherwise produce the trivial root lambda = 1 in every draw. On
//! non-singular pairs the two restrictions coincide, which the oracle suite
//! pins against direct (A+B)^{-1} B solves.
//!
//! The high-dimensional problems this crate builds all produce A and B as
//! Gram matrices F^T F of factors with few rows (bounded by the sample
//! size), so [`DoubleWishartPair`] keeps the factored form when available
//! and the solver works in the factor row space: the truncated
//! eigendecomposition of A comes from the small Gram matrix F F^T, and the
//! spectrum of C from an even smaller flipped Gram matrix when B has few
//! factor rows. Nothing p x p is ever formed on that path, which is what
//! makes permutation loops at p in the hundreds-to-thousands cheap. Dense
//! inputs (for example a linearly shrunk A) take the classical dense path
//! instead.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Roots within EPS_CLIP of 0 or 1 are clipped and flagged so the logit
/// stays finite.
pub const EPS_CLIP: f64 = 1e-12;

/// Default relative eigenvalue cutoff for rank truncation.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-9;

/// Relative symmetry tolerance accepted by dense constructors.
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Slack beyond [0, 1] tolerated for restricted eigenvalues before the input
/// is declared non-PSD.
const PSD_SLACK: f64 = 1e-8;

/// Problem bookkeeping carried by a pair: a label plus the degrees of
/// freedom annotations (m for A, n for B) and the pencil dimension p.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PairMeta {
    pub label: String,
    /// Degrees of freedom attributed to A.
    pub df_a: usize,
    /// Degrees of freedom attributed to B.
    pub df_b: usize,
    /// Dimension of the matrices.
    pub p: usize,
}

/// One side of the pair: either an explicit symmetric matrix or a Gram
/// factor F (r x p) representing F^T F.
#[derive(Debug, Clone)]
pub enum PairSide {
    Dense(DMatrix<f64>),
    Gram { factor: DMatrix<f64> },
}

impl PairSide {
    fn p(&self) -> usize {
        match self {
            PairSide::Dense(m) => m.ncols(),
            PairSide::Gram { factor } => factor.ncols(),
        }
    }

    /// Materialize the symmetric matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            PairSide::Dense(m) => m.clone(),
            PairSide::Gram { factor } => factor.transpose() * factor,
        }
    }
}

/// The (A, B) matrices of a double Wishart problem, possibly in factored
/// form, plus the truncation tolerance and metadata.
#[derive(Debug, Clone)]
pub struct DoubleWishartPair {
    a: PairSide,
    b: PairSide,
    rank_tolerance: f64,
    meta: PairMeta,
}

impl DoubleWishartPair {
    /// Build from dense symmetric matrices. Each matrix must be symmetric to
    /// 1e-10 relative tolerance and is symmetrized before storage.
    pub fn from_dense(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        rank_tolerance: f64,
        meta: PairMeta,
    ) -> Result<Self> {
        validate_tolerance(rank_tolerance)?;
        if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.ncols() != b.ncols() {
            return Err(Error::validation(format!(
                "A ({}x{}) and B ({}x{}) must be square with equal dimension",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        let a = symmetrize(a, "A")?;
        let b = symmetrize(b, "B")?;
        Ok(DoubleWishartPair {
            a: PairSide::Dense(a),
            b: PairSide::Dense(b),
            rank_tolerance,
            meta,
        })
    }

    /// Build from Gram factors (A = fa^T fa, B = fb^T fb).
    pub fn from_factors(
        factor_a: DMatrix<f64>,
        factor_b: DMatrix<f64>,
        rank_tolerance: f64,
        meta: PairMeta,
    ) -> Result<Self> {
        validate_tolerance(rank_tolerance)?;
        let p = factor_a.ncols();
        if factor_b.ncols() != p {
            return Err(Error::validation(
                "pair factors must share the same column count",
            ));
        }
        Ok(DoubleWishartPair {
            a: PairSide::Gram { factor: factor_a },
            b: PairSide::Gram { factor: factor_b },
            rank_tolerance,
            meta,
        })
    }

    pub fn p(&self) -> usize {
        self.a.p()
    }

    pub fn meta(&self) -> &PairMeta {
        &self.meta
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn a(&self) -> &PairSide {
        &self.a
    }

    pub fn b(&self) -> &PairSide {
        &self.b
    }

    pub fn a_dense(&self) -> DMatrix<f64> {
        self.a.to_dense()
    }

    pub fn b_dense(&self) -> DMatrix<f64> {
        self.b.to_dense()
    }

    /// Replace the A side with a dense matrix (drops any A + B factor).
    pub(crate) fn replace_a_dense(&self, a: DMatrix<f64>, label_suffix: &str) -> Result<Self> {
        let a = symmetrize(a, "A")?;
        Ok(DoubleWishartPair {
            a: PairSide::Dense(a),
            b: self.b.clone(),
            rank_tolerance: self.rank_tolerance,
            meta: PairMeta {
                label: format!("{}{}", self.meta.label, label_suffix),
                ..self.meta.clone()
            },
        })
    }
}

fn validate_tolerance(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::validation(format!(
            "rank tolerance must lie in (0, 1), got {tol}"
        )));
    }
    Ok(())
}

fn symmetrize(m: DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    let scale = m.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())).max(1e-300);
    let mut max_asym = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            max_asym = max_asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if max_asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::validation(format!(
            "{name} is not symmetric: max asymmetry {max_asym:.3e} exceeds {:.1e} of scale {scale:.3e}",
            SYMMETRY_TOLERANCE
        )));
    }
    let mt = m.transpose();
    Ok((m + mt) * 0.5)
}

/// The largest root of the restricted determinantal problem.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LargestRoot {
    /// The root, clipped into [EPS_CLIP, 1 - EPS_CLIP].
    pub lambda: f64,
    /// log(lambda / (1 - lambda)).
    pub logit_lambda: f64,
    /// Rank of the error-side subspace the problem was solved on.
    pub effective_rank: usize,
    /// True when the raw root sat at a numerical boundary and was clipped.
    pub clipped: bool,
}

/// Natural-log odds transform used throughout the crate.
pub fn logit(x: f64) -> f64 {
    (x / (1.0 - x)).ln()
}

/// Truncated eigendecomposition of a dense symmetric matrix: eigenpairs with
/// eigenvalue > rank_tolerance * max eigenvalue, eigenvalues descending.
pub fn truncated_evd(
    m: &DMatrix<f64>,
    rank_tolerance: f64,
) -> Result<(DVector<f64>, DMatrix<f64>, usize)> {
    validate_tolerance(rank_tolerance)?;
    if m.nrows() != m.ncols() {
        return Err(Error::validation("matrix must be square"));
    }
    let sym = symmetrize(m.clone(), "matrix")?;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let max_ev = eig.eigenvalues[order[0]];
    if max_ev <= 0.0 {
        return Err(Error::degenerate(
            "all eigenvalues are at or below zero; rank-zero matrix",
        ));
    }
    let cutoff = rank_tolerance * max_ev;
    let kept: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i] > cutoff)
        .collect();
    let r = kept.len();
    let values = DVector::from_iterator(r, kept.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(m.nrows(), r);
    for (k, &i) in kept.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors, r))
}

/// Truncated eigendecomposition of F^T F obtained from the small Gram matrix
/// F F^T: returns (eigenvalues descending, row-space vectors W so that
/// U = F^T W diag(1/sqrt(d)) are the orthonormal eigenvectors of F^T F).
/// A rank-zero input yields empty outputs rather than an error.
fn gram_truncated(
    factor: &DMatrix<f64>,
    rank_tolerance: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let gram = factor * factor.transpose();
    let gram_rows = gram.nrows();
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let max_ev = eig.eigenvalues[order[0]];
    if max_ev <= 0.0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(gram_rows, 0)));
    }
    let cutoff = rank_tolerance * max_ev;
    let kept: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i] > cutoff)
        .collect();
    let r = kept.len();
    let values = DVector::from_iterator(r, kept.iter().map(|&i| eig.eigenvalues[i]));
    let mut w = DMatrix::zeros(gram_rows, r);
    for (k, &i) in kept.iter().enumerate() {
        w.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok((values, w))
}

/// Internal solve product: the restricted spectrum (descending lambda values
/// in [0, 1]) plus the data needed to reconstruct p-space eigenvectors.
struct Restricted {
    roots: Vec<f64>,
    rank: usize,
    /// Basis U (p x r) and eigenvalues d of A; present for vector recovery.
    basis: Option<(DMatrix<f64>, DVector<f64>)>,
    /// Eigenvectors of C matching `roots` (r x k), when computed.
    c_vectors: Option<DMatrix<f64>>,
}

fn solve_restricted(pair: &DoubleWishartPair, want_vectors: bool) -> Result<Restricted> {
    let tol = pair.rank_tolerance;
    // Truncated EVD of A, as (U, d) with U^T A U = diag(d).
    let (d, u) = match &pair.a {
        // When the factor has more rows than columns the p x p product is
        // the smaller eigenproblem.
        PairSide::Gram { factor: fa } if fa.nrows() > fa.ncols() => {
            let a = fa.transpose() * fa;
            match truncated_evd(&a, tol) {
                Ok((d, u, _)) => (d, u),
                Err(Error::Degenerate(_)) => (DVector::zeros(0), DMatrix::zeros(pair.p(), 0)),
                Err(e) => return Err(e),
            }
        }
        PairSide::Gram { factor: fa } => {
            let (d, w) = gram_truncated(fa, tol)?;
            let u = factor_basis(fa, &w, &d);
            (d, u)
        }
        PairSide::Dense(a) => match truncated_evd(a, tol) {
            Ok((d, u, _)) => (d, u),
            Err(Error::Degenerate(_)) => (DVector::zeros(0), DMatrix::zeros(pair.p(), 0)),
            Err(e) => return Err(e),
        },
    };
    let r = d.len();

    if r == 0 {
        // A vanished at the tolerance. With mass in B the supremum of the
        // ratio is the trivial boundary root; with none the problem is empty.
        let b_mass = match &pair.b {
            PairSide::Gram { factor } => factor.iter().map(|v| v * v).sum::<f64>(),
            PairSide::Dense(b) => b.trace(),
        };
        if b_mass > 0.0 {
            return Ok(Restricted {
                roots: vec![1.0],
                rank: 0,
                basis: None,
                c_vectors: None,
            });
        }
        return Err(Error::degenerate(
            "A + B has rank zero at the requested tolerance",
        ));
    }

    // Roy pencil C = D^{-1/2} U^T B U D^{-1/2}; theta ranges over its
    // spectrum (nonnegative, unbounded) and lambda = theta / (1 + theta).
    // For a Gram B = fb^T fb with few rows, the nonzero spectrum of C equals
    // that of the flipped Gram G~ G~^T with G~ = fb U D^{-1/2}.
    let dinv_sqrt = DVector::from_iterator(r, d.iter().map(|&x| 1.0 / x.sqrt()));
    let (thetas, c_vectors) = match &pair.b {
        PairSide::Gram { factor: fb } => {
            let mut g = fb * &u; // b x r
            for (j, mut col) in g.column_iter_mut().enumerate() {
                col *= dinv_sqrt[j];
            }
            let b_rows = g.nrows();
            if b_rows < r && !want_vectors {
                let small = &g * g.transpose(); // b x b
                let eig = small.symmetric_eigen();
                let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
                vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
                vals.resize(r, 0.0);
                (vals, None)
            } else {
                let c = g.transpose() * &g; // r x r
                let eig = c.symmetric_eigen();
                sorted_spectrum(eig, want_vectors)
            }
        }
        PairSide::Dense(b) => {
            let bu = b * &u; // p x r
            let mut c = u.transpose() * bu; // r x r
            for i in 0..r {
                for j in 0..r {
                    c[(i, j)] *= dinv_sqrt[i] * dinv_sqrt[j];
                }
            }
            let c = symmetrize(c, "restricted matrix")?;
            let eig = c.symmetric_eigen();
            sorted_spectrum(eig, want_vectors)
        }
    };

    let theta_scale = thetas.iter().fold(1.0f64, |acc, &t| acc.max(t.abs()));
    let mut roots = Vec::with_capacity(thetas.len());
    for &theta in &thetas {
        if theta < -PSD_SLACK * theta_scale {
            return Err(Error::degenerate(format!(
                "restricted pencil eigenvalue {theta:.6e} is negative;                  inputs are not positive semi-definite"
            )));
        }
        let t = theta.max(0.0);
        roots.push(t / (1.0 + t));
    }
    Ok(Restricted {
        roots,
        rank: r,
        basis: want_vectors.then(|| (u, d)),
        c_vectors,
    })
}

/// U = F^T W diag(1/sqrt(d)).
fn factor_basis(factor: &DMatrix<f64>, w: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let mut u = factor.transpose() * w;
    for (j, mut col) in u.column_iter_mut().enumerate() {
        col /= d[j].sqrt();
    }
    u
}

fn sorted_spectrum(
    eig: nalgebra::SymmetricEigen<f64, nalgebra::Dyn>,
    want_vectors: bool,
) -> (Vec<f64>, Option<DMatrix<f64>>) {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = want_vectors.then(|| {
        let mut m = DMatrix::zeros(eig.eigenvectors.nrows(), order.len());
        for (k, &i) in order.iter().enumerate() {
            m.set_column(k, &eig.eigenvectors.column(i));
        }
        m
    });
    (vals, vectors)
}

fn clip_root(raw: f64, rank: usize) -> LargestRoot {
    let clipped = !(EPS_CLIP..=1.0 - EPS_CLIP).contains(&raw);
    let lambda = raw.clamp(EPS_CLIP, 1.0 - EPS_CLIP);
    LargestRoot {
        lambda,
        logit_lambda: logit(lambda),
        effective_rank: rank,
        clipped,
    }
}

/// Largest root of det(B - lambda (A + B)) = 0 restricted to the column
/// space of A + B.
pub fn largest_root(pair: &DoubleWishartPair) -> Result<LargestRoot> {
    let solved = solve_restricted(pair, false)?;
    Ok(clip_root(solved.roots[0], solved.rank))
}

/// Full restricted spectrum, descending, each root in [0, 1] (unclipped).
pub fn all_roots(pair: &DoubleWishartPair) -> Result<Vec<f64>> {
    Ok(solve_restricted(pair, false)?.roots)
}

/// Largest root together with the attaining direction mapped back to
/// p-space, normalized to unit length with a deterministic sign (largest
/// absolute component positive).
pub fn largest_root_with_vector(pair: &DoubleWishartPair) -> Result<(LargestRoot, DVector<f64>)> {
    let solved = solve_restricted(pair, true)?;
    let root = clip_root(solved.roots[0], solved.rank);
    if solved.rank == 0 {
        return Err(Error::degenerate(
            "cannot recover a maximizing direction: A has rank zero",
        ));
    }
    let (u, d) = solved.basis.expect("basis requested");
    let c_vectors = solved.c_vectors.expect("vectors requested");
    let x = c_vectors.column(0);
    // w_raw = U D^{-1/2} x
    let mut scaled = DVector::zeros(solved.rank);
    for i in 0..solved.rank {
        scaled[i] = x[i] / d[i].sqrt();
    }
    let mut w = &u * scaled;
    let norm = w.norm();
    if norm > 0.0 {
        w /= norm;
    }
    let lead = w
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    if w[lead] < 0.0 {
        w = -w;
    }
    Ok((root, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn meta(p: usize) -> PairMeta {
        PairMeta {
            label: "test".into(),
            df_a: 1,
            df_b: 1,
            p,
        }
    }

    fn normal_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn truncated_evd_identity() {
        let (vals, vecs, r) = truncated_evd(&DMatrix::identity(3, 3), 1e-10).unwrap();
        assert_eq!(r, 3);
        for v in vals.iter() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-12);
        }
        let qtq = vecs.transpose() * &vecs;
        assert_relative_eq!(qtq, DMatrix::identity(3, 3), epsilon = 1e-10);
    }

    #[test]
    fn truncated_evd_diagonal_rank_one() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0, 0.0]));
        let (vals, _, r) = truncated_evd(&m, 1e-10).unwrap();
        assert_eq!(r, 1);
        assert_relative_eq!(vals[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn truncated_evd_matches_small_gram_side() {
        // Eigenvalues of Z Z^T (5x5, rank 3) must match those of Z^T Z (3x3).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z = normal_matrix(&mut rng, 5, 3);
        let big = &z * z.transpose();
        let small = z.transpose() * &z;
        let (vals, vecs, r) = truncated_evd(&big, 1e-10).unwrap();
        assert_eq!(r, 3);
        let small_eig = {
            let mut v: Vec<f64> = small.symmetric_eigen().eigenvalues.iter().copied().collect();
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v
        };
        for k in 0..3 {
            assert_relative_eq!(vals[k], small_eig[k], max_relative = 1e-10);
        }
        // Reconstruction on the retained subspace.
        let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((&recon - &big).norm() <= 1e-8 * big.norm());
    }

    #[test]
    fn truncated_evd_rejects_asymmetric_and_rank_zero() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            truncated_evd(&m, 1e-10),
            Err(Error::Validation(_))
        ));
        let z = DMatrix::zeros(2, 2);
        assert!(matches!(truncated_evd(&z, 1e-10), Err(Error::Degenerate(_))));
    }

    #[test]
    fn scalar_largest_root() {
        let pair = DoubleWishartPair::from_dense(
            DMatrix::from_element(1, 1, 2.0),
            DMatrix::from_element(1, 1, 6.0),
            1e-9,
            meta(1),
        )
        .unwrap();
        let root = largest_root(&pair).unwrap();
        assert_relative_eq!(root.lambda, 0.75, epsilon = 1e-12);
        assert!(!root.clipped);
        assert_eq!(root.effective_rank, 1);
    }

    #[test]
    fn restricted_scalar_case() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        let pair = DoubleWishartPair::from_dense(a, b, 1e-9, meta(2)).unwrap();
        let root = largest_root(&pair).unwrap();
        assert_eq!(root.effective_rank, 1);
        assert_relative_eq!(root.lambda, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn all_roots_decoupled_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![6.0, 2.0]));
        let pair = DoubleWishartPair::from_dense(a, b, 1e-9, meta(2)).unwrap();
        let roots = all_roots(&pair).unwrap();
        assert_relative_eq!(roots[0], 0.75, epsilon = 1e-12);
        assert_relative_eq!(roots[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn all_roots_identity_symmetry() {
        let pair = DoubleWishartPair::from_dense(
            DMatrix::identity(3, 3),
            DMatrix::identity(3, 3),
            1e-9,
            meta(3),
        )
        .unwrap();
        for r in all_roots(&pair).unwrap() {
            assert_relative_eq!(r, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn root_sum_equals_restricted_trace() {
        // Seeded 5x5 pair: sum of roots = trace of D^{-1/2} U^T B U D^{-1/2}.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fa = normal_matrix(&mut rng, 7, 5);
        let fb = normal_matrix(&mut rng, 6, 5);
        let a = fa.transpose() * &fa;
        let b = fb.transpose() * &fb;
        let pair =
            DoubleWishartPair::from_dense(a.clone(), b.clone(), 1e-9, meta(5)).unwrap();
        let roots = all_roots(&pair).unwrap();
        let (d, u, r) = truncated_evd(&(&a + &b), 1e-9).unwrap();
        let mut c = u.transpose() * &b * &u;
        for i in 0..r {
            for j in 0..r {
                c[(i, j)] /= (d[i] * d[j]).sqrt();
            }
        }
        let trace: f64 = (0..r).map(|i| c[(i, i)]).sum();
        let sum: f64 = roots.iter().sum();
        assert_relative_eq!(sum, trace, max_relative = 1e-10);
    }

    #[test]
    fn factor_and_dense_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..20 {
            let p = 2 + (trial % 5);
            let fa = normal_matrix(&mut rng, p + 3, p);
            let fb = normal_matrix(&mut rng, p + 2, p);
            let dense = DoubleWishartPair::from_dense(
                fa.transpose() * &fa,
                fb.transpose() * &fb,
                1e-9,
                meta(p),
            )
            .unwrap();
            let factored =
                DoubleWishartPair::from_factors(fa.clone(), fb.clone(), 1e-9, meta(p))
                    .unwrap();
            let r1 = largest_root(&dense).unwrap();
            let r2 = largest_root(&factored).unwrap();
            assert_relative_eq!(r1.lambda, r2.lambda, max_relative = 1e-9);
            assert_eq!(r1.effective_rank, r2.effective_rank);
        }
    }

    #[test]
    fn congruence_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = 4;
        let fa = normal_matrix(&mut rng, 8, p);
        let fb = normal_matrix(&mut rng, 7, p);
        let a = fa.transpose() * &fa;
        let b = fb.transpose() * &fb;
        // Random invertible congruence C.
        let c = normal_matrix(&mut rng, p, p) + DMatrix::identity(p, p) * 3.0;
        let pair = DoubleWishartPair::from_dense(a.clone(), b.clone(), 1e-9, meta(p)).unwrap();
        let ta = c.transpose() * &a * &c;
        let tb = c.transpose() * &b * &c;
        let pair_t = DoubleWishartPair::from_dense(ta, tb, 1e-9, meta(p)).unwrap();
        let r1 = largest_root(&pair).unwrap().lambda;
        let r2 = largest_root(&pair_t).unwrap().lambda;
        assert_relative_eq!(r1, r2, max_relative = 1e-8);
    }

    #[test]
    fn swap_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let p = 4;
        let fa = normal_matrix(&mut rng, 9, p);
        let fb = normal_matrix(&mut rng, 8, p);
        let a = fa.transpose() * &fa;
        let b = fb.transpose() * &fb;
        let ab = DoubleWishartPair::from_dense(a.clone(), b.clone(), 1e-9, meta(p)).unwrap();
        let ba = DoubleWishartPair::from_dense(b, a, 1e-9, meta(p)).unwrap();
        let mut fwd = all_roots(&ab).unwrap();
        let rev = all_roots(&ba).unwrap();
        fwd.reverse(); // ascending
        for (x, y) in fwd.iter().zip(rev.iter()) {
            assert_relative_eq!(*y, 1.0 - *x, epsilon = 1e-8);
        }
    }

    #[test]
    fn clipping_flags_boundary_roots() {
        // B = 0 gives lambda = 0, clipped at the lower boundary.
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::zeros(2, 2);
        let pair = DoubleWishartPair::from_dense(a, b, 1e-9, meta(2)).unwrap();
        let root = largest_root(&pair).unwrap();
        assert!(root.clipped);
        assert_relative_eq!(root.lambda, EPS_CLIP, epsilon = 1e-15);
        assert!(root.logit_lambda.is_finite());
    }

    #[test]
    fn rank_zero_pair_is_degenerate() {
        let pair = DoubleWishartPair::from_dense(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            1e-9,
            meta(2),
        )
        .unwrap();
        assert!(matches!(largest_root(&pair), Err(Error::Degenerate(_))));
    }

    #[test]
    fn vector_attains_the_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = 5;
        let fa = normal_matrix(&mut rng, 9, p);
        let fb = normal_matrix(&mut rng, 8, p);
        let pair = DoubleWishartPair::from_factors(fa.clone(), fb.clone(), 1e-9, meta(p))
            .unwrap();
        let (root, w) = largest_root_with_vector(&pair).unwrap();
        assert_relative_eq!(w.norm(), 1.0, epsilon = 1e-10);
        let a = fa.transpose() * &fa;
        let b = fb.transpose() * &fb;
        let num = (w.transpose() * &b * &w)[(0, 0)];
        let den = (w.transpose() * (&a + &b) * &w)[(0, 0)];
        assert_relative_eq!(num / den, root.lambda, max_relative = 1e-8);
    }
}
