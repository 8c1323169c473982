use std::fmt;
use std::iter::Sum;

use num_traits::{Float, NumAssign, NumCast};

/// Floating-point scalar the numerics are generic over.
///
/// Implemented by `f32` and `f64`. All tolerances in this crate are stated
/// for `f64`; narrower types widen them via [`Scalar::stochastic_tol`].
pub trait Scalar:
    Float + NumAssign + Sum<Self> + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal (tolerances, constants).
    fn of(x: f64) -> Self {
        NumCast::from(x).expect("f64 literal must be representable in the scalar type")
    }

    /// Lossy conversion to `f64`, for error payloads and reporting.
    fn as_f64(self) -> f64 {
        num_traits::cast(self).unwrap_or(f64::NAN)
    }

    /// Column-stochasticity tolerance: 1e-12, widened to 32 ulps for scalar
    /// types coarser than `f64`.
    fn stochastic_tol() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(32.0))
    }
}

impl<T> Scalar for T where
    T: Float
        + NumAssign
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + Default
        + Send
        + Sync
        + 'static
{
}
