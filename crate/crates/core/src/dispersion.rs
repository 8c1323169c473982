//! Per-stage patch-to-patch dispersion structure and the global dispersion
//! matrix.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Per-stage dispersion probabilities between patches.
///
/// `tables[k]` is an `n x n` matrix whose `(i, j)` entry is the probability
/// that a stage-`k` individual moves from patch `j` to patch `i` during one
/// time increment; every column sums to 1 (each individual either disperses
/// to exactly one other patch or stays). Demography happens first within a
/// time increment, dispersion second.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSpec<T> {
    stages: usize,
    patches: usize,
    tables: Vec<Matrix<T>>,
}

impl<T: Scalar> DispersionSpec<T> {
    /// Strict constructor: entries in [0, 1], columns summing to 1 within
    /// 1e-12 (widened for scalars coarser than f64).
    pub fn new(tables: Vec<Matrix<T>>) -> Result<Self> {
        Self::build(tables, T::zero())
    }

    /// Lenient constructor: columns whose sums deviate from 1 by less than
    /// `max_deviation` are renormalized; larger deviations are an error.
    /// Meant for configuration loaders absorbing decimal-literal rounding.
    pub fn renormalized(tables: Vec<Matrix<T>>, max_deviation: T) -> Result<Self> {
        Self::build(tables, max_deviation)
    }

    fn build(mut tables: Vec<Matrix<T>>, renorm_below: T) -> Result<Self> {
        assert!(!tables.is_empty(), "at least one stage required");
        let patches = tables[0].rows();
        let stages = tables.len();
        let tol = T::stochastic_tol();
        for (k, table) in tables.iter_mut().enumerate() {
            if !table.is_square() || table.rows() != patches {
                return Err(Error::DimensionMismatch(format!(
                    "dispersion table for stage {} is {}x{}, expected {patches}x{patches}",
                    k + 1,
                    table.rows(),
                    table.cols()
                )));
            }
            for j in 0..patches {
                for i in 0..patches {
                    let v = table[(i, j)];
                    if !(v.is_finite() && v >= -tol && v <= T::one() + tol) {
                        return Err(Error::InvalidDispersion {
                            stage: k + 1,
                            patch: j + 1,
                            reason: format!("probability {v} outside [0, 1]"),
                        });
                    }
                }
                let sum = table.column_sum(j);
                let dev = (sum - T::one()).abs();
                if dev <= tol {
                    continue;
                }
                if dev < renorm_below && sum > T::zero() {
                    for i in 0..patches {
                        table[(i, j)] = table[(i, j)] / sum;
                    }
                } else {
                    return Err(Error::InvalidDispersion {
                        stage: k + 1,
                        patch: j + 1,
                        reason: format!("outgoing probabilities sum to {sum}, must sum to 1"),
                    });
                }
            }
        }
        Ok(DispersionSpec {
            stages,
            patches,
            tables,
        })
    }

    /// No-dispersion spec: every stage stays put in every patch.
    pub fn identity(stages: usize, patches: usize) -> Self {
        DispersionSpec {
            stages,
            patches,
            tables: vec![Matrix::identity(patches); stages],
        }
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn patches(&self) -> usize {
        self.patches
    }

    /// Probability that a stage-`stage` individual moves from patch `from`
    /// to patch `to` (all 0-based).
    pub fn probability(&self, stage: usize, to: usize, from: usize) -> T {
        self.tables[stage][(to, from)]
    }

    /// Local dispersion matrix for the patch pair `(to, from)`: the `m x m`
    /// diagonal of per-stage movement probabilities.
    pub fn local_matrix(&self, to: usize, from: usize) -> Result<Matrix<T>> {
        if to >= self.patches || from >= self.patches {
            return Err(Error::IndexOutOfRange(format!(
                "patch pair ({}, {}) for {} patches",
                to + 1,
                from + 1,
                self.patches
            )));
        }
        let diag: Vec<T> = (0..self.stages)
            .map(|k| self.tables[k][(to, from)])
            .collect();
        Ok(Matrix::diagonal(&diag))
    }

    /// Global dispersion matrix: the `mn x mn` block matrix whose `(i, j)`
    /// block is `local_matrix(i, j)`. Column stochastic by construction.
    pub fn global_matrix(&self) -> Matrix<T> {
        let m = self.stages;
        let n = self.patches;
        Matrix::from_fn(m * n, m * n, |p, q| {
            let (i, k) = (p / m, p % m);
            let (j, l) = (q / m, q % m);
            if k == l {
                self.tables[k][(i, j)]
            } else {
                T::zero()
            }
        })
    }
}

/// True when every column of the square matrix sums to 1 within 1e-12.
pub fn validate_stochasticity<T: Scalar>(d: &Matrix<T>) -> bool {
    assert!(d.is_square(), "stochasticity check requires a square matrix");
    let tol = T::stochastic_tol();
    (0..d.cols()).all(|j| (d.column_sum(j) - T::one()).abs() <= tol)
}
