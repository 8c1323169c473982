//! Spectral radius of nonnegative matrices via L1-normalized power
//! iteration, with fallbacks for imprimitive and defective cases.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{frobenius_bounds, is_irreducible, l1_norm_matrix, Matrix};

/// Default absolute tolerance on the eigen-residual `||B v - rho v||`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default iteration cap for the power method.
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Spectral radius estimate together with Perron vectors when available.
///
/// `converged` means the value estimate met the requested tolerance.
/// `right` is L1-normalized and nonnegative. `left` is present only when
/// both vector iterations converged and the products could be scaled so
/// that `left . right = 1`; it is absent otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronData<T> {
    pub value: T,
    pub right: Option<Vec<T>>,
    pub left: Option<Vec<T>>,
    pub converged: bool,
    pub iterations: usize,
}

struct IterationOutcome<T> {
    lambda: T,
    vector: Vec<T>,
    iterations: usize,
    converged: bool,
}

/// L1-normalized power iteration on `B + shift I`, reporting the eigenvalue
/// of `B` itself. Detects period-two oscillation of the estimate and bails
/// out early so the caller can fall back.
fn power_iterate<T: Scalar>(
    b: &Matrix<T>,
    shift: bool,
    tol: T,
    max_iter: usize,
) -> IterationOutcome<T> {
    let n = b.rows();
    let mut x = vec![T::one() / T::of(n as f64); n];
    let mut lambda = T::zero();
    let mut prev = T::nan();
    let mut prev2 = T::nan();
    for it in 1..=max_iter {
        let mut y = b.mul_vec(&x);
        if shift {
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi += *xi;
            }
        }
        let raw: T = y.iter().copied().sum();
        let unshifted = if shift { raw - T::one() } else { raw };
        if raw == T::zero() {
            // B x = 0 exactly, so x is an eigenvector for eigenvalue 0
            // (nilpotent action on the current iterate).
            return IterationOutcome {
                lambda: T::zero(),
                vector: x,
                iterations: it,
                converged: true,
            };
        }
        let residual: T = y
            .iter()
            .zip(&x)
            .map(|(&yi, &xi)| (yi - raw * xi).abs())
            .sum();
        if residual <= tol {
            return IterationOutcome {
                lambda: unshifted,
                vector: x,
                iterations: it,
                converged: true,
            };
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = *yi / raw;
        }
        lambda = unshifted;
        let scale = T::one().max(raw.abs());
        if it > 16
            && (raw - prev2).abs() <= T::of(1e-13) * scale
            && (raw - prev).abs() > T::of(1e-8) * scale
        {
            // estimate cycles with period two: imprimitive structure
            return IterationOutcome {
                lambda,
                vector: x,
                iterations: it,
                converged: false,
            };
        }
        prev2 = prev;
        prev = raw;
    }
    IterationOutcome {
        lambda,
        vector: x,
        iterations: max_iter,
        converged: false,
    }
}

/// Gelfand estimate `||B^t||^(1/t)` at `t = 2^5 .. 2^8` via scaled repeated
/// squaring, extrapolated in log space to cancel the `C t^d` prefactor. Two
/// overlapping three-point extrapolations serve as an agreement check; on
/// disagreement the raw upper estimate at `t = 256` is used instead.
fn gelfand_estimate<T: Scalar>(b: &Matrix<T>) -> T {
    let c = l1_norm_matrix(b);
    if c == T::zero() {
        return T::zero();
    }
    let mut y = b.scale(T::one() / c);
    let mut log_scale = c.ln();
    let mut samples = [T::zero(); 4]; // log ||B^t||^(1/t) at t = 32, 64, 128, 256
    for k in 1..=8usize {
        y = y.matmul(&y);
        let m = l1_norm_matrix(&y);
        if m == T::zero() {
            return T::zero(); // nilpotent
        }
        log_scale = log_scale + log_scale + m.ln();
        y = y.scale(T::one() / m);
        if k >= 5 {
            samples[k - 5] = log_scale / T::of((1usize << k) as f64);
        }
    }
    let four = T::of(4.0);
    let early = four * samples[2] - four * samples[1] + samples[0];
    let late = four * samples[3] - four * samples[2] + samples[1];
    let extrapolated = late.exp();
    if (early.exp() - extrapolated).abs() <= T::of(1e-4) * T::one().max(extrapolated) {
        extrapolated
    } else {
        samples[3].exp()
    }
}

fn uniform<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one() / T::of(n as f64); n]
}

/// Spectral radius of a nonnegative square matrix, with Perron vectors when
/// the power iteration converges.
///
/// Strategy: irreducible matrices are iterated as `I + B` (primitive, so the
/// iteration always settles); reducible ones are iterated directly, retried
/// on `B^2` when the estimate oscillates, and finally estimated through the
/// Gelfand sequence clamped to the Frobenius column-sum bounds. Only the
/// last path reports `converged = false`.
pub fn spectral_radius<T: Scalar>(
    b: &Matrix<T>,
    tol: T,
    max_iter: usize,
) -> Result<PerronData<T>> {
    if !b.is_square() {
        return Err(Error::NonSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    if let Some((row, col, value)) = b.find_negative() {
        return Err(Error::NegativeEntry {
            row,
            col,
            value: value.as_f64(),
        });
    }
    assert!(tol > T::zero(), "tolerance must be positive");
    let n = b.rows();

    if b.entries().iter().all(|&x| x == T::zero()) {
        return Ok(PerronData {
            value: T::zero(),
            right: Some(uniform(n)),
            left: Some(vec![T::one(); n]),
            converged: true,
            iterations: 0,
        });
    }

    let shift = is_irreducible(b);
    let right_run = power_iterate(b, shift, tol, max_iter);
    if right_run.converged {
        let value = right_run.lambda;
        let v = right_run.vector;
        let left_run = power_iterate(&b.transpose(), shift, tol, max_iter);
        let left = if left_run.converged {
            let u = left_run.vector;
            let dot: T = u.iter().zip(&v).map(|(&a, &b)| a * b).sum();
            if dot > T::of(1e-14) {
                Some(u.iter().map(|&ui| ui / dot).collect())
            } else {
                None
            }
        } else {
            None
        };
        return Ok(PerronData {
            value,
            right: Some(v),
            left,
            converged: true,
            iterations: right_run.iterations,
        });
    }

    // Imprimitive or defective: the squared matrix splits period-two cycles
    // into aperiodic classes, and rho(B)^2 = rho(B^2) always holds.
    let squared = b.matmul(b);
    let sq_run = power_iterate(&squared, false, tol, max_iter);
    if sq_run.converged {
        return Ok(PerronData {
            value: sq_run.lambda.max(T::zero()).sqrt(),
            right: None,
            left: None,
            converged: true,
            iterations: right_run.iterations + sq_run.iterations,
        });
    }

    let (lo, hi) = frobenius_bounds(b)?;
    let value = gelfand_estimate(b).max(lo).min(hi);
    Ok(PerronData {
        value,
        right: None,
        left: None,
        converged: false,
        iterations: max_iter,
    })
}
