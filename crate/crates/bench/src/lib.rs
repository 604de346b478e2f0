//! Shared generators for the benchmark targets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wishroot::nalgebra::DMatrix;
use wishroot::{DataMatrix, DoubleWishartPair, PairMeta, PcevSpec, ProblemSpec};

pub fn normal_matrix(seed: u64, r: usize, c: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng))
}

/// A singular Wishart pair in factored form (df_a = 96, df_b = 4).
pub fn singular_pair(p: usize, seed: u64) -> DoubleWishartPair {
    let za = normal_matrix(seed, 96, p);
    let zb = normal_matrix(seed.wrapping_add(1), 4, p);
    DoubleWishartPair::from_factors(
        za,
        zb,
        1e-9,
        PairMeta {
            label: "bench".into(),
            df_a: 96,
            df_b: 4,
            p,
        },
    )
    .unwrap()
}

/// A null PCEV problem with a balanced binary covariate.
pub fn pcev_problem(n: usize, p: usize, seed: u64) -> ProblemSpec {
    let y = DataMatrix::unlabeled(normal_matrix(seed, n, p)).unwrap();
    let x = DataMatrix::unlabeled(DMatrix::from_fn(n, 1, |i, _| {
        if i < n / 2 {
            0.0
        } else {
            1.0
        }
    }))
    .unwrap();
    ProblemSpec::Pcev(PcevSpec::new(y, x, None).unwrap())
}
