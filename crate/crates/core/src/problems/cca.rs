//! CCA as a double Wishart problem: with P the hat matrix of the centered
//! projection-side matrix, A = X^T P_perp X and B = X^T P X, and the largest
//! root is the squared first canonical correlation.

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{DoubleWishartPair, PairMeta, DEFAULT_RANK_TOLERANCE};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CcaSpec {
    /// High-dimensional side (n x q).
    x: DataMatrix,
    /// Projection side (n x p_low); must have fewer columns than rows.
    y: DataMatrix,
}

impl CcaSpec {
    /// The constructor auto-orients: the side with fewer columns than rows
    /// becomes the projector. If both qualify the declared projection side
    /// (`y`) is used; if neither does, the problem is rejected.
    pub fn new(x: DataMatrix, y: DataMatrix) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::validation(format!(
                "X has {} rows but Y has {}",
                x.n(),
                y.n()
            )));
        }
        let n = x.n();
        if y.p() < n {
            Ok(CcaSpec { x, y })
        } else if x.p() < n {
            Ok(CcaSpec { x: y, y: x })
        } else {
            Err(Error::validation(format!(
                "neither side has fewer columns than rows (n = {n}); \
                 the projection side must be sub-saturated"
            )))
        }
    }

    /// High-dimensional side.
    pub fn x(&self) -> &DataMatrix {
        &self.x
    }

    /// Projection side.
    pub fn y(&self) -> &DataMatrix {
        &self.y
    }

    pub fn build(&self) -> Result<DoubleWishartPair> {
        self.build_with_tolerance(DEFAULT_RANK_TOLERANCE)
    }

    pub fn build_with_tolerance(&self, rank_tolerance: f64) -> Result<DoubleWishartPair> {
        let xc = self.x.centered();
        let yc = self.y.centered();
        let (q_basis, dependent) = super::orthonormal_basis(&yc, super::BASIS_TOLERANCE);
        if !dependent.is_empty() {
            let names: Vec<&str> = dependent
                .iter()
                .map(|&j| self.y.column_labels()[j].as_str())
                .collect();
            return Err(Error::validation(format!(
                "projection-side matrix is rank deficient; dependent columns: {}",
                names.join(", ")
            )));
        }
        // B = (Q^T Xc)^T (Q^T Xc), A = ((I - QQ^T) Xc)^T ((I - QQ^T) Xc),
        // A + B = Xc^T Xc.
        let proj_coords = q_basis.transpose() * &xc; // p_low x q
        let residual = &xc - &q_basis * &proj_coords; // n x q
        DoubleWishartPair::from_factors(
            residual,
            proj_coords,
            rank_tolerance,
            PairMeta {
                label: "cca".into(),
                df_a: self.x.n() - self.y.p(),
                df_b: self.y.p(),
                p: self.x.p(),
            },
        )
    }

    /// Permute the rows of X, keeping Y fixed.
    pub fn permuted(&self, rng: &mut ChaCha8Rng) -> CcaSpec {
        let perm = super::random_permutation(self.x.n(), rng);
        self.with_x_rows(&perm)
    }

    /// Deterministic row permutation of X.
    pub fn with_x_rows(&self, perm: &[usize]) -> CcaSpec {
        CcaSpec {
            x: self.x.permuted_rows(perm),
            y: self.y.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::largest_root;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn data(n: usize, p: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::unlabeled(DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng)))
            .unwrap()
    }

    #[test]
    fn orthogonal_sides_give_zero_root() {
        // X lives in coordinates Y never touches after centering.
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut y = DMatrix::zeros(n, 2);
        let mut x = DMatrix::zeros(n, 3);
        // y spans a subspace of "low" coordinates, x of disjoint ones, and we
        // build X explicitly orthogonal to [1, Yc].
        for i in 0..n {
            y[(i, 0)] = StandardNormal.sample(&mut rng);
            y[(i, 1)] = StandardNormal.sample(&mut rng);
        }
        let yd = DataMatrix::unlabeled(y).unwrap();
        let yc = yd.centered();
        let (qy, _) = crate::problems::orthonormal_basis(&yc, 1e-10);
        for j in 0..3 {
            let mut col: nalgebra::DVector<f64> =
                nalgebra::DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            // center, then project out Q_y
            let mean = col.sum() / n as f64;
            col.add_scalar_mut(-mean);
            let coeff = qy.transpose() * &col;
            col -= &qy * coeff;
            for i in 0..n {
                x[(i, j)] = col[i];
            }
        }
        let spec = CcaSpec::new(DataMatrix::unlabeled(x).unwrap(), yd).unwrap();
        let root = largest_root(&spec.build().unwrap()).unwrap();
        assert!(root.lambda <= 1e-10);
    }

    #[test]
    fn perfect_correlation_clips_at_one() {
        let y = data(15, 3, 4);
        // X = first column of Y
        let x_vals = DMatrix::from_fn(15, 1, |i, _| y.values()[(i, 0)]);
        let spec = CcaSpec::new(DataMatrix::unlabeled(x_vals).unwrap(), y).unwrap();
        let root = largest_root(&spec.build().unwrap()).unwrap();
        assert!(root.clipped);
        assert!(root.lambda >= 1.0 - 1e-12 - 1e-15);
    }

    #[test]
    fn matches_reference_small_matrix_cca() {
        // n = 50, q = 5, p_low = 3: sqrt(lambda) equals the first canonical
        // correlation from Sigma_X^{-1/2} S_xy S_y^{-1} S_yx Sigma_X^{-1/2}.
        let x = data(50, 5, 8);
        let y = data(50, 3, 9);
        let spec = CcaSpec::new(x.clone(), y.clone()).unwrap();
        let root = largest_root(&spec.build().unwrap()).unwrap();

        let xc = x.centered();
        let yc = y.centered();
        let sxx = xc.transpose() * &xc;
        let syy = yc.transpose() * &yc;
        let sxy = xc.transpose() * &yc;
        // symmetric inverse square root of sxx
        let eig = sxx.clone().symmetric_eigen();
        let mut inv_sqrt = DMatrix::zeros(5, 5);
        for k in 0..5 {
            let v = eig.eigenvectors.column(k);
            inv_sqrt += v * v.transpose() / eig.eigenvalues[k].sqrt();
        }
        let m = &inv_sqrt
            * &sxy
            * syy.try_inverse().unwrap()
            * sxy.transpose()
            * &inv_sqrt;
        let top = m
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::MIN, |a, &b| a.max(b));
        assert_relative_eq!(root.lambda, top, max_relative = 1e-8);
    }

    #[test]
    fn auto_orientation_swaps_sides() {
        // Declared "x" is low-dimensional, "y" is saturated: constructor swaps.
        let wide = data(10, 20, 5);
        let narrow = data(10, 2, 6);
        let spec = CcaSpec::new(narrow.clone(), wide.clone()).unwrap();
        assert_eq!(spec.y().p(), 2);
        assert_eq!(spec.x().p(), 20);
        // both orientations give the same largest root
        let spec2 = CcaSpec::new(wide, narrow).unwrap();
        let r1 = largest_root(&spec.build().unwrap()).unwrap();
        let r2 = largest_root(&spec2.build().unwrap()).unwrap();
        assert_relative_eq!(r1.lambda, r2.lambda, max_relative = 1e-10);
    }

    #[test]
    fn rank_deficient_projector_names_columns() {
        let mut vals = DMatrix::zeros(10, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..10 {
            vals[(i, 0)] = StandardNormal.sample(&mut rng);
            vals[(i, 1)] = 2.0 * vals[(i, 0)];
            vals[(i, 2)] = StandardNormal.sample(&mut rng);
        }
        let y = DataMatrix::new(vals, vec!["alpha".into(), "beta".into(), "gamma".into()])
            .unwrap();
        let x = data(10, 8, 4);
        let err = CcaSpec::new(x, y).unwrap().build().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("beta"), "error should name the column: {msg}");
    }

    #[test]
    fn identity_permutation_reproduces_spec() {
        let x = data(12, 6, 20);
        let y = data(12, 2, 21);
        let spec = CcaSpec::new(x, y).unwrap();
        let same = spec.with_x_rows(&(0..12).collect::<Vec<_>>());
        assert_eq!(spec.x().values(), same.x().values());
        assert_eq!(spec.y().values(), same.y().values());
    }

    #[test]
    fn sum_identity_holds() {
        let x = data(25, 40, 10);
        let y = data(25, 4, 11);
        let pair = CcaSpec::new(x.clone(), y).unwrap().build().unwrap();
        let xc = x.centered();
        let expected = xc.transpose() * &xc;
        let sum = pair.a_dense() + pair.b_dense();
        assert!((&sum - &expected).norm() <= 1e-8 * expected.norm());
    }
}
