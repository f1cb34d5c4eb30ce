//! Scalar abstractions shared by the statistics modules.
//!
//! Two tiers: [`Scalar`] covers anything that can hold a ratio of counts
//! exactly or approximately (floats and rationals), [`Real`] adds the
//! transcendental functions needed for log-space probabilities and tail
//! integrals.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Float, FloatConst, FromPrimitive, Num};

/// A number that counts can be lifted into.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync {
    fn from_count(n: u64) -> Self;
}

/// Floating-point scalar used by everything that needs logarithms.
pub trait Real: Scalar + Float + FloatConst + FromPrimitive + Copy + 'static {
    /// Lift an `f64` constant. Panics only if the target cannot represent
    /// finite doubles, which no supported float type does.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_count(n: u64) -> Self {
        n as f32
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_count(n: u64) -> Self {
        n as f64
    }
}

impl Real for f32 {}
impl Real for f64 {}

impl Scalar for BigRational {
    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

impl Scalar for Ratio<i128> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(i128::from(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_lift_exactly() {
        let big = (1u64 << 53) + 1;
        assert_eq!(BigRational::from_count(big).to_integer(), BigInt::from(big));
        assert_eq!(Ratio::<i128>::from_count(big).to_integer(), i128::from(big));
        assert_eq!(f64::from_count(1 << 53), 9007199254740992.0);
    }

    #[test]
    fn literals() {
        assert_eq!(f32::lit(0.5), 0.5f32);
        assert_eq!(f64::lit(0.5).to_f64_lossy(), 0.5);
    }
}
