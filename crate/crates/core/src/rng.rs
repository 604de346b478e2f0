//! Deterministic random-stream derivation.
//!
//! Every randomized routine in this crate draws from a ChaCha stream derived
//! from a caller-supplied seed. Parallel replicates get disjoint streams
//! keyed by their index, so results are bit-identical for a given seed no
//! matter how the replicates are scheduled or how many worker threads run
//! them.
//!
//! Stream layout for one logical task seed:
//! * stream 0 — data generation / primary draws,
//! * stream k+1 — permutation replicate k.
//!
//! Nested contexts (e.g. one simulation inside a study) first derive a child
//! seed with [`child_seed`], then apply the same layout.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for top-level draws under `seed` (stream 0).
pub fn task_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// RNG for permutation replicate `index` under `seed` (stream index+1).
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index + 1);
    rng
}

/// Derive an independent child seed for nested task `index` (SplitMix64
/// finalizer over the pair).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
