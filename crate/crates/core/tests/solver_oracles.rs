//! Oracle-equivalence suite: the truncated solver against direct dense
//! solves that never touch the truncation path.

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wishroot::{all_roots, largest_root, DoubleWishartPair, PairMeta};

fn normal_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

fn meta(p: usize) -> PairMeta {
    PairMeta {
        label: "oracle".into(),
        df_a: 0,
        df_b: 0,
        p,
    }
}

/// Direct solve via the Cholesky reduction of the generalized problem:
/// the largest eigenvalue of L^{-1} B L^{-T} where A + B = L L^T. Shares no
/// code with the truncated path.
fn dense_largest_root_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let total = a + b;
    let chol = nalgebra::Cholesky::new(total).expect("oracle needs a full-rank pair");
    let l_inv_b = chol.l().solve_lower_triangular(b).unwrap();
    let reduced = chol
        .l()
        .solve_lower_triangular(&l_inv_b.transpose())
        .unwrap();
    let sym = (&reduced + reduced.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::MIN, |acc, &v| acc.max(v))
}

#[test]
fn largest_root_matches_dense_inverse_solve_on_fuzzed_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let p = 2 + trial % 9; // up to 10
        let fa = normal_matrix(&mut rng, p + 4, p);
        let fb = normal_matrix(&mut rng, p + 3, p);
        let a = fa.transpose() * &fa;
        let b = fb.transpose() * &fb;
        let oracle = dense_largest_root_oracle(&a, &b);

        let dense_pair = DoubleWishartPair::from_dense(a, b, 1e-9, meta(p)).unwrap();
        let factor_pair = DoubleWishartPair::from_factors(fa, fb, 1e-9, meta(p)).unwrap();
        let r_dense = largest_root(&dense_pair).unwrap().lambda;
        let r_factor = largest_root(&factor_pair).unwrap().lambda;
        assert_relative_eq!(r_dense, oracle, max_relative = 1e-8);
        assert_relative_eq!(r_factor, oracle, max_relative = 1e-8);
    }
}

#[test]
fn seeded_4x4_pair_from_wishart_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fa = normal_matrix(&mut rng, 9, 4);
    let fb = normal_matrix(&mut rng, 7, 4);
    let a = fa.transpose() * &fa;
    let b = fb.transpose() * &fb;
    let pair = DoubleWishartPair::from_dense(a.clone(), b.clone(), 1e-9, meta(4)).unwrap();
    let root = largest_root(&pair).unwrap();
    let oracle = dense_largest_root_oracle(&a, &b);
    assert_relative_eq!(root.lambda, oracle, max_relative = 1e-8);
}

#[test]
fn full_spectrum_matches_generalized_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let p = 6;
    let fa = normal_matrix(&mut rng, 11, p);
    let fb = normal_matrix(&mut rng, 10, p);
    let a = fa.transpose() * &fa;
    let b = fb.transpose() * &fb;
    let pair = DoubleWishartPair::from_factors(fa, fb, 1e-9, meta(p)).unwrap();
    let roots = all_roots(&pair).unwrap();
    // oracle: eigenvalues of (A+B)^{-1} B via LU inverse
    let m = (&a + &b).try_inverse().unwrap() * &b;
    let mut oracle: Vec<f64> = m.complex_eigenvalues().iter().map(|c| c.re).collect();
    oracle.sort_by(|x, y| y.partial_cmp(x).unwrap());
    assert_eq!(roots.len(), p);
    for (got, want) in roots.iter().zip(&oracle) {
        assert_relative_eq!(*got, *want, max_relative = 1e-8, epsilon = 1e-10);
    }
}
