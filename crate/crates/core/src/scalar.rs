//! Scalar abstractions shared by the exact and floating-point kernels.
//!
//! Exact kernels (star discrepancy, cell integration of `D^p`) are generic over
//! [`ExactInt`], so the same code runs on `i128` when the bit budget allows and on
//! [`BigInt`] otherwise. Floating-point outputs are generic over [`Real`] (`f32` or
//! `f64`).

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, SubAssign};

use num_bigint::BigInt;
use num_traits::{Float, FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Floating-point scalar used for reported norms and sampled quantities.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Serialize + Sum + 'static
{
    /// Lossy conversion from `f64`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Signed integer used as an exact accumulator.
pub trait ExactInt:
    Clone
    + Debug
    + Send
    + Sync
    + Zero
    + One
    + Signed
    + PartialOrd
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
    /// Largest magnitude (in bits) a value may reach without overflow.
    const CAPACITY_BITS: u64;

    fn from_u64(v: u64) -> Self;
    fn from_i64(v: i64) -> Self;
    fn into_bigint(self) -> BigInt;

    fn mul_ref(&self, other: &Self) -> Self;

    /// `self * 2^shift`.
    fn shl(&self, shift: u32) -> Self;
}

impl ExactInt for i128 {
    const CAPACITY_BITS: u64 = 126;

    fn from_u64(v: u64) -> Self {
        v as i128
    }

    fn from_i64(v: i64) -> Self {
        v as i128
    }

    fn into_bigint(self) -> BigInt {
        BigInt::from(self)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn shl(&self, shift: u32) -> Self {
        self << shift
    }
}

impl ExactInt for BigInt {
    const CAPACITY_BITS: u64 = u64::MAX;

    fn from_u64(v: u64) -> Self {
        BigInt::from(v)
    }

    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn into_bigint(self) -> BigInt {
        self
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn shl(&self, shift: u32) -> Self {
        self << shift
    }
}

/// Number of bits needed to hold `v` (0 for 0).
pub(crate) fn bit_len(v: u128) -> u64 {
    (128 - v.leading_zeros()) as u64
}

/// Exact conversion of a rational to a float, correct for very large numerators and
/// denominators where a direct `to_f64` of either part would overflow.
pub(crate) fn ratio_to_f64(r: &num_rational::BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(v) = r.to_f64() {
        if v.is_finite() && v != 0.0 {
            return v;
        }
    }
    // rescale so that both parts fit, keeping 64 significant bits of each
    let num = r.numer();
    let den = r.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (num.abs() >> ns as usize).to_f64().unwrap_or(0.0);
    let d = (den >> ds as usize).to_f64().unwrap_or(1.0);
    let sign = if num.is_negative() { -1.0 } else { 1.0 };
    sign * (n / d) * 2f64.powi((ns - ds) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn ratio_conversion_handles_huge_parts() {
        let big = BigInt::one() << 3000usize;
        let r = BigRational::new(big.clone() * 3, big * 4);
        assert_eq!(ratio_to_f64(&r), 0.75);
        let tiny = BigRational::new(BigInt::one(), BigInt::one() << 1100usize);
        assert_eq!(ratio_to_f64(&tiny), 0.0);
    }
}
