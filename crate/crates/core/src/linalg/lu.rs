//! LU factorization with partial pivoting and multi-right-hand-side solves.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{l1_norm_matrix, Matrix};

/// Pivots with absolute value below this threshold are treated as singular.
const PIVOT_FLOOR: f64 = 1e-14;

struct LuFactors<T> {
    packed: Matrix<T>,
    perm: Vec<usize>,
}

fn factor<T: Scalar>(m: &Matrix<T>) -> Result<LuFactors<T>> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let floor = T::of(PIVOT_FLOOR);
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_val = a[(k, k)].abs();
        for i in k + 1..n {
            let v = a[(i, k)].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = i;
            }
        }
        if pivot_val < floor {
            return Err(Error::Singular {
                pivot: pivot_val.as_f64(),
            });
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(pivot_row, j)];
                a[(pivot_row, j)] = tmp;
            }
            perm.swap(k, pivot_row);
        }
        let inv_pivot = T::one() / a[(k, k)];
        for i in k + 1..n {
            let factor = a[(i, k)] * inv_pivot;
            a[(i, k)] = factor;
            for j in k + 1..n {
                let akj = a[(k, j)];
                a[(i, j)] = a[(i, j)] - factor * akj;
            }
        }
    }
    Ok(LuFactors { packed: a, perm })
}

fn solve_one<T: Scalar>(lu: &LuFactors<T>, b: &[T]) -> Vec<T> {
    let n = lu.perm.len();
    let mut x: Vec<T> = lu.perm.iter().map(|&p| b[p]).collect();
    for i in 1..n {
        for k in 0..i {
            let l = lu.packed[(i, k)];
            let xk = x[k];
            x[i] = x[i] - l * xk;
        }
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let u = lu.packed[(i, k)];
            let xk = x[k];
            x[i] = x[i] - u * xk;
        }
        x[i] = x[i] / lu.packed[(i, i)];
    }
    x
}

/// Solve `M * X = B` column-by-column via LU with partial pivoting.
///
/// One pass of iterative refinement is applied when the residual exceeds
/// `1e-12 * max(1, ||B||)`, so the returned solution satisfies
/// `||M X - B|| <= 1e-10 * ||B||` for any reasonably conditioned `M`.
pub fn solve_linear<T: Scalar>(m: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if m.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "solve: matrix has {} rows but right-hand side has {}",
            m.rows(),
            b.rows()
        )));
    }
    let lu = factor(m)?;
    let n = m.rows();
    let mut x = Matrix::zeros(n, b.cols());
    let mut col = vec![T::zero(); n];
    for j in 0..b.cols() {
        for i in 0..n {
            col[i] = b[(i, j)];
        }
        let sol = solve_one(&lu, &col);
        for i in 0..n {
            x[(i, j)] = sol[i];
        }
    }

    let target = T::of(1e-12) * T::one().max(l1_norm_matrix(b));
    for _ in 0..2 {
        let residual = b.sub(&m.matmul(&x));
        if l1_norm_matrix(&residual) <= target {
            break;
        }
        for j in 0..b.cols() {
            for i in 0..n {
                col[i] = residual[(i, j)];
            }
            let dx = solve_one(&lu, &col);
            for i in 0..n {
                x[(i, j)] += dx[i];
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let b = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let x = solve_linear(&Matrix::identity(2), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn scaled_identity() {
        let two_i = Matrix::<f64>::identity(3).scale(2.0);
        let x = solve_linear(&two_i, &Matrix::identity(3)).unwrap();
        assert!(x.max_abs_diff(&Matrix::identity(3).scale(0.5)) < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(
            solve_linear(&m, &Matrix::identity(2)),
            Err(Error::Singular { .. })
        ));
    }
}
