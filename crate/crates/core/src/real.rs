//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use serde::Serialize;

use crate::quadrature::QuadValue;

/// Floating point scalar the library is generic over (`f32` or `f64`).
///
/// On top of `num_traits::Float` this carries the one special function the
/// measurement normalisation needs.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Serialize + QuadValue<Self> + Send + Sync + 'static
{
    /// Gauss error function.
    fn erf(self) -> Self;

    /// Lossy conversion used when reporting or sampling.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f64 {
    fn erf(self) -> Self {
        libm::erf(self)
    }

    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    fn erf(self) -> Self {
        libm::erff(self)
    }

    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Sign function with `sgn(0) = 0`.
#[inline]
pub fn sgn<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgn_of_zero_is_zero() {
        assert_eq!(sgn(0.0_f64), 0.0);
        assert_eq!(sgn(-0.0_f64), 0.0);
        assert_eq!(sgn(-2.5_f32), -1.0);
        assert_eq!(sgn(1e-300_f64), 1.0);
    }

    #[test]
    fn erf_matches_known_value() {
        // erf(1) = 0.8427007929497149
        assert!((Real::erf(1.0_f64) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((Real::erf(1.0_f32) - 0.842_700_8).abs() < 1e-6);
    }
}
