//! One-way MANOVA as a double Wishart problem: A is the within-group sum of
//! squares W, B the between-group sum of squares.

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{DoubleWishartPair, PairMeta, DEFAULT_RANK_TOLERANCE};
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct ManovaSpec {
    y: DataMatrix,
    groups: Vec<String>,
}

impl ManovaSpec {
    pub fn new(y: DataMatrix, groups: Vec<String>) -> Result<Self> {
        if groups.len() != y.n() {
            return Err(Error::validation(format!(
                "{} group labels for {} observations",
                groups.len(),
                y.n()
            )));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for g in &groups {
            *counts.entry(g.as_str()).or_default() += 1;
        }
        if counts.len() < 2 {
            return Err(Error::validation("MANOVA needs at least 2 groups"));
        }
        if let Some((g, c)) = counts.iter().find(|(_, &c)| c < 2) {
            return Err(Error::validation(format!(
                "group {g:?} has {c} member(s); every group needs at least 2"
            )));
        }
        Ok(ManovaSpec { y, groups })
    }

    pub fn y(&self) -> &DataMatrix {
        &self.y
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn build(&self) -> Result<DoubleWishartPair> {
        self.build_with_tolerance(DEFAULT_RANK_TOLERANCE)
    }

    pub fn build_with_tolerance(&self, rank_tolerance: f64) -> Result<DoubleWishartPair> {
        let n = self.y.n();
        let p = self.y.p();
        let y = self.y.values();

        // Group index per row, groups in deterministic (sorted) order.
        let mut group_ids: BTreeMap<&str, usize> = BTreeMap::new();
        for g in &self.groups {
            let next = group_ids.len();
            group_ids.entry(g.as_str()).or_insert(next);
        }
        let k_g = group_ids.len();
        let idx: Vec<usize> = self.groups.iter().map(|g| group_ids[g.as_str()]).collect();

        let mut counts = vec![0usize; k_g];
        let mut means = DMatrix::<f64>::zeros(k_g, p);
        let mut grand = DVector::<f64>::zeros(p);
        for i in 0..n {
            counts[idx[i]] += 1;
            for j in 0..p {
                means[(idx[i], j)] += y[(i, j)];
                grand[j] += y[(i, j)];
            }
        }
        grand /= n as f64;
        for g in 0..k_g {
            for j in 0..p {
                means[(g, j)] /= counts[g] as f64;
            }
        }

        // Within factor: rows y_i - mean(group(i)); between factor:
        // rows sqrt(n_g) (mean_g - grand mean).
        let within = DMatrix::from_fn(n, p, |i, j| y[(i, j)] - means[(idx[i], j)]);
        let between = DMatrix::from_fn(k_g, p, |g, j| {
            (counts[g] as f64).sqrt() * (means[(g, j)] - grand[j])
        });

        DoubleWishartPair::from_factors(
            within,
            between,
            rank_tolerance,
            PairMeta {
                label: "manova".into(),
                df_a: n - k_g,
                df_b: k_g - 1,
                p,
            },
        )
    }

    /// Permute the group labels, keeping Y fixed.
    pub fn permuted(&self, rng: &mut ChaCha8Rng) -> ManovaSpec {
        let perm = super::random_permutation(self.groups.len(), rng);
        let groups = perm.iter().map(|&i| self.groups[i].clone()).collect();
        ManovaSpec {
            y: self.y.clone(),
            groups,
        }
    }

    /// Relabel by an explicit permutation (index i takes label perm[i]).
    pub fn relabeled(&self, perm: &[usize]) -> Result<ManovaSpec> {
        if perm.len() != self.groups.len() {
            return Err(Error::validation("permutation length mismatch"));
        }
        let groups = perm.iter().map(|&i| self.groups[i].clone()).collect();
        Ok(ManovaSpec {
            y: self.y.clone(),
            groups,
        })
    }
}
