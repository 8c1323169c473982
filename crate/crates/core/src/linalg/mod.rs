//! Dense real-matrix substrate: L1 norms, LU solves, power iteration for
//! Perron data, Frobenius column-sum bounds, and boolean irreducibility /
//! primitivity tests.
//!
//! Everything here is sized for the small matrices of stage-patch models
//! (dimension up to a few hundred); storage is dense row-major.

mod lu;
mod power;

pub use lu::solve_linear;
pub use power::{spectral_radius, PerronData, DEFAULT_MAX_ITER, DEFAULT_TOL};

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix over a real scalar type.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            entries: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(
            rows.iter().all(|r| r.len() == cols),
            "ragged rows in matrix literal"
        );
        Matrix {
            rows: rows.len(),
            cols,
            entries: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (k, &v) in diag.iter().enumerate() {
            m[(k, k)] = v;
        }
        m
    }

    /// Block-diagonal assembly; all blocks must be square.
    pub fn block_diagonal(blocks: &[Matrix<T>]) -> Self {
        let dim: usize = blocks.iter().map(|b| b.rows).sum();
        let mut m = Matrix::zeros(dim, dim);
        let mut off = 0;
        for b in blocks {
            assert!(b.is_square(), "block-diagonal blocks must be square");
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(off + i, off + j)] = b[(i, j)];
                }
            }
            off += b.rows;
        }
        m
    }

    /// Assemble an `(bn*br) x (bn*bc)` matrix from an `bn x bn` grid of
    /// equally sized blocks, in row-major grid order.
    pub fn from_block_grid(bn: usize, blocks: &[Matrix<T>]) -> Self {
        assert_eq!(blocks.len(), bn * bn, "block grid must be bn x bn");
        let br = blocks[0].rows;
        let bc = blocks[0].cols;
        assert!(
            blocks.iter().all(|b| b.rows == br && b.cols == bc),
            "all blocks must share dimensions"
        );
        let mut m = Matrix::zeros(bn * br, bn * bc);
        for gi in 0..bn {
            for gj in 0..bn {
                let b = &blocks[gi * bn + gj];
                for i in 0..br {
                    for j in 0..bc {
                        m[(gi * br + i, gj * bc + j)] = b[(i, j)];
                    }
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|&x| x >= T::zero())
    }

    /// First strictly negative entry, if any.
    pub fn find_negative(&self) -> Option<(usize, usize, T)> {
        self.entries
            .iter()
            .position(|&x| x < T::zero())
            .map(|p| (p / self.cols, p % self.cols, self.entries[p]))
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "vector length must match columns");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn column_sum(&self, j: usize) -> T {
        (0..self.rows).map(|i| self[(i, j)]).sum()
    }

    pub fn column_sums(&self) -> Vec<T> {
        (0..self.cols).map(|j| self.column_sum(j)).collect()
    }

    /// Sub-matrix keeping the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix<T> {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Largest absolute entry-wise difference; a test and diagnostics helper.
    pub fn max_abs_diff(&self, other: &Matrix<T>) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self.entries[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// L1 norm of a vector: the sum of absolute components.
pub fn l1_norm_vector<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&v| v.abs()).sum()
}

/// Induced L1 matrix norm: the maximum absolute column sum.
pub fn l1_norm_matrix<T: Scalar>(b: &Matrix<T>) -> T {
    (0..b.cols())
        .map(|j| (0..b.rows()).map(|i| b[(i, j)].abs()).sum())
        .fold(T::zero(), T::max)
}

/// Column-sum bounds `(min, max)` sandwiching the spectral radius of a
/// nonnegative square matrix.
pub fn frobenius_bounds<T: Scalar>(b: &Matrix<T>) -> Result<(T, T)> {
    if !b.is_square() {
        return Err(Error::NonSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for j in 0..b.cols() {
        let s: T = (0..b.rows()).map(|i| b[(i, j)].abs()).sum();
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok((lo, hi))
}

fn bool_matmul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    if b[k][j] {
                        out[i][j] = true;
                    }
                }
            }
        }
    }
    out
}

fn bool_pow(base: &[Vec<bool>], mut exp: usize) -> Vec<Vec<bool>> {
    let n = base.len();
    let mut result: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    let mut sq = base.to_vec();
    while exp > 0 {
        if exp & 1 == 1 {
            result = bool_matmul(&result, &sq);
        }
        exp >>= 1;
        if exp > 0 {
            sq = bool_matmul(&sq, &sq);
        }
    }
    result
}

fn sign_pattern<T: Scalar>(b: &Matrix<T>) -> Vec<Vec<bool>> {
    (0..b.rows())
        .map(|i| (0..b.cols()).map(|j| b[(i, j)] != T::zero()).collect())
        .collect()
}

/// Irreducibility of a nonnegative square matrix: `(I + sign(B))^(m-1) > 0`
/// element-wise, evaluated in boolean arithmetic.
pub fn is_irreducible<T: Scalar>(b: &Matrix<T>) -> bool {
    assert!(b.is_square(), "irreducibility requires a square matrix");
    let m = b.rows();
    let mut pattern = sign_pattern(b);
    for (k, row) in pattern.iter_mut().enumerate() {
        row[k] = true;
    }
    bool_pow(&pattern, m - 1)
        .iter()
        .all(|row| row.iter().all(|&x| x))
}

/// Primitivity of a nonnegative square matrix: `B^((m-1)^2 + 2) > 0`
/// element-wise, evaluated in boolean arithmetic.
pub fn is_primitive<T: Scalar>(b: &Matrix<T>) -> bool {
    assert!(b.is_square(), "primitivity requires a square matrix");
    let m = b.rows();
    let pattern = sign_pattern(b);
    bool_pow(&pattern, (m - 1) * (m - 1) + 2)
        .iter()
        .all(|row| row.iter().all(|&x| x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_vector_norm_definition() {
        assert_eq!(l1_norm_vector(&[1.0, -2.0, 3.0]), 6.0);
        assert_eq!(l1_norm_vector(&[0.0; 4]), 0.0);
        assert_eq!(l1_norm_vector(&[0.25, 0.75]), 1.0);
    }

    #[test]
    fn l1_matrix_norm_is_max_column_sum() {
        assert_eq!(l1_norm_matrix(&Matrix::<f64>::identity(3)), 1.0);
        // two-stage survival/fecundity pair with s = 1/20, R = 1/4:
        // columns (0, s) and (R/s, 0)
        let s: f64 = 1.0 / 20.0;
        let r: f64 = 0.25;
        let a = Matrix::from_rows(&[vec![0.0, r / s], vec![s, 0.0]]);
        assert_eq!(l1_norm_matrix(&a), (r / s).max(s));
        let stoch = Matrix::from_rows(&[vec![0.5, 0.0], vec![0.5, 1.0]]);
        assert_eq!(l1_norm_matrix(&stoch), 1.0);
    }

    #[test]
    fn frobenius_bounds_column_sums() {
        let id = Matrix::<f64>::identity(2);
        assert_eq!(frobenius_bounds(&id).unwrap(), (1.0, 1.0));
        let b = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(frobenius_bounds(&b).unwrap(), (4.0, 6.0));
        let stoch = Matrix::from_rows(&[vec![0.3_f64, 0.9], vec![0.7, 0.1]]);
        let (lo, hi) = frobenius_bounds(&stoch).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let rect = Matrix::from_fn(2, 3, |_, _| 1.0);
        assert!(matches!(
            frobenius_bounds(&rect),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn irreducibility_on_small_patterns() {
        let pos = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, 0.25]]);
        assert!(is_irreducible(&pos));
        let decoupled = Matrix::<f64>::identity(2);
        assert!(!is_irreducible(&decoupled));
        // three-stage life cycle with last-stage reproduction: 1 -> 2 -> 3 -> 1
        let usher = Matrix::from_rows(&[
            vec![0.0, 0.0, 1.7],
            vec![0.4, 0.2, 0.0],
            vec![0.0, 0.3, 0.1],
        ]);
        assert!(is_irreducible(&usher));
    }

    #[test]
    fn primitivity_on_small_patterns() {
        let pos = Matrix::from_fn(3, 3, |_, _| 0.5);
        assert!(is_primitive(&pos));
        let perm = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(!is_primitive(&perm));
        assert!(is_irreducible(&perm));
        // irreducible with a positive diagonal element
        let b = Matrix::from_rows(&[vec![0.1, 1.0], vec![1.0, 0.0]]);
        assert!(is_irreducible(&b) && is_primitive(&b));
    }

    #[test]
    fn select_extracts_submatrix() {
        let b = Matrix::from_fn(4, 4, |i, j| (4 * i + j) as f64);
        let s = b.select(&[0, 2], &[0, 2]);
        assert_eq!(s[(0, 0)], 0.0);
        assert_eq!(s[(0, 1)], 2.0);
        assert_eq!(s[(1, 0)], 8.0);
        assert_eq!(s[(1, 1)], 10.0);
    }
}
