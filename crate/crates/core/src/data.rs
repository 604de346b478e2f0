//! Dense observation matrices with validated ingestion.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// An n x p matrix of observations (rows = samples, columns = variables)
/// with column labels. Construction rejects non-finite entries, n < 2 and
/// p < 1, so downstream code can assume clean data.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    column_labels: Vec<String>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, column_labels: Vec<String>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::validation(format!(
                "need at least 2 observations, got {}",
                values.nrows()
            )));
        }
        if values.ncols() < 1 {
            return Err(Error::validation("need at least 1 variable"));
        }
        if column_labels.len() != values.ncols() {
            return Err(Error::validation(format!(
                "{} column labels for {} columns",
                column_labels.len(),
                values.ncols()
            )));
        }
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                let v = values[(i, j)];
                if !v.is_finite() {
                    return Err(Error::validation(format!(
                        "non-finite value {} at row {}, column {:?}",
                        v,
                        i + 1,
                        column_labels[j]
                    )));
                }
            }
        }
        Ok(DataMatrix {
            values,
            column_labels,
        })
    }

    /// Construct with generated labels v1..vp.
    pub fn unlabeled(values: DMatrix<f64>) -> Result<Self> {
        let labels = (1..=values.ncols()).map(|j| format!("v{j}")).collect();
        DataMatrix::new(values, labels)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_labels(&self) -> &[String] {
        &self.column_labels
    }

    /// Column-centered copy of the values.
    pub fn centered(&self) -> DMatrix<f64> {
        let mut out = self.values.clone();
        for mut col in out.column_iter_mut() {
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            col.add_scalar_mut(-mean);
        }
        out
    }

    /// Copy with rows reordered as `values[perm[i], :] -> row i`.
    pub(crate) fn permuted_rows(&self, perm: &[usize]) -> DataMatrix {
        debug_assert_eq!(perm.len(), self.n());
        let values = DMatrix::from_fn(self.n(), self.p(), |i, j| self.values[(perm[i], j)]);
        DataMatrix {
            values,
            column_labels: self.column_labels.clone(),
        }
    }

    /// Bypass validation for internally produced matrices (already finite).
    pub(crate) fn from_parts_unchecked(values: DMatrix<f64>, column_labels: Vec<String>) -> Self {
        DataMatrix {
            values,
            column_labels,
        }
    }
}
