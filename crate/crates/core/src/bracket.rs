//! One-dimensional root bracketing and bisection shared by the graph
//! reduction and critical-rate searches.

use crate::error::Error;
use crate::scalar::Scalar;

/// Bisect `f` on a bracket with a sign change until the interval is
/// narrower than `tol`; returns the midpoint. The endpoints' values may be
/// supplied when already known.
pub fn bisect<T: Scalar, E>(
    mut f: impl FnMut(T) -> std::result::Result<T, E>,
    (mut lo, mut hi): (T, T),
    (mut f_lo, f_hi): (T, T),
    tol: T,
) -> std::result::Result<T, E> {
    debug_assert!(lo < hi && f_lo * f_hi <= T::zero());
    let _ = f_hi;
    let two = T::of(2.0);
    while hi - lo > tol {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break; // interval exhausted at this precision
        }
        let f_mid = f(mid)?;
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid * f_lo > T::zero() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / two)
}

/// Scan `[lo, hi]` in `subdivisions` equal steps and return the rightmost
/// interval on which `f` changes sign, together with the endpoint values.
/// An exact zero at a grid point is returned as a degenerate bracket.
pub fn rightmost_sign_change<T: Scalar, E>(
    mut f: impl FnMut(T) -> std::result::Result<T, E>,
    (lo, hi): (T, T),
    subdivisions: usize,
    what: &str,
) -> std::result::Result<std::result::Result<((T, T), (T, T)), Error>, E> {
    let step = (hi - lo) / T::of(subdivisions as f64);
    let mut right = hi;
    let mut f_right = f(right)?;
    for k in (0..subdivisions).rev() {
        let left = lo + step * T::of(k as f64);
        let f_left = f(left)?;
        if f_right == T::zero() {
            return Ok(Ok(((right, right), (f_right, f_right))));
        }
        if f_left * f_right < T::zero() {
            return Ok(Ok(((left, right), (f_left, f_right))));
        }
        right = left;
        f_right = f_left;
    }
    if f_right == T::zero() {
        return Ok(Ok(((right, right), (f_right, f_right))));
    }
    Ok(Err(Error::NoRoot {
        what: what.to_string(),
        lo: lo.as_f64(),
        hi: hi.as_f64(),
    }))
}
