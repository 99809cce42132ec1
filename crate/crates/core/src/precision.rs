//! Scalar abstraction over machine doubles and arbitrary-precision floats.
//!
//! Precision is counted the way machine epsilon is: `p` bits mean a unit
//! roundoff of `2^-p`, so `p = 52` is standard double precision. The MPFR
//! backend therefore allocates `p + 1` significand bits.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Round;
use rug::ops::AssignRound;
use rug::{Float, Rational};

/// Real scalar usable in the sparse products, Gram-Schmidt and QR kernels.
pub trait Real:
    Clone
    + PartialOrd
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    /// Creates a value at the given precision (ignored for `f64`).
    fn seed(precision_bits: u32, value: f64) -> Self;

    /// A constant carrying the same precision as `self`.
    fn of(&self, value: f64) -> Self;

    fn precision_bits(&self) -> u32;

    /// Correctly rounded conversion of an exact rational.
    fn from_rational(q: &Rational, precision_bits: u32) -> Self;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn hypot(&self, other: &Self) -> Self;
    /// `2^e` at the precision of `self`.
    fn exp2_of(&self, e: i64) -> Self;
    fn is_finite(&self) -> bool;

    fn is_zero(&self) -> bool {
        *self == self.of(0.0)
    }
}

impl Real for f64 {
    fn seed(_precision_bits: u32, value: f64) -> Self {
        value
    }

    fn of(&self, value: f64) -> Self {
        value
    }

    fn precision_bits(&self) -> u32 {
        52
    }

    fn from_rational(q: &Rational, _precision_bits: u32) -> Self {
        q.to_f64()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn hypot(&self, other: &Self) -> Self {
        f64::hypot(*self, *other)
    }

    fn exp2_of(&self, e: i64) -> Self {
        (e as f64).exp2()
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Real for Float {
    fn seed(precision_bits: u32, value: f64) -> Self {
        Float::with_val(precision_bits + 1, value)
    }

    fn of(&self, value: f64) -> Self {
        Float::with_val(self.prec(), value)
    }

    fn precision_bits(&self) -> u32 {
        self.prec() - 1
    }

    fn from_rational(q: &Rational, precision_bits: u32) -> Self {
        let mut f = Float::new(precision_bits + 1);
        f.assign_round(q, Round::Nearest);
        f
    }

    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }

    fn abs(&self) -> Self {
        self.clone().abs()
    }

    fn sqrt(&self) -> Self {
        self.clone().sqrt()
    }

    fn ln(&self) -> Self {
        self.clone().ln()
    }

    fn hypot(&self, other: &Self) -> Self {
        self.clone().hypot(other)
    }

    fn exp2_of(&self, e: i64) -> Self {
        let f = Float::with_val(self.prec(), e);
        f.exp2()
    }

    fn is_finite(&self) -> bool {
        Float::is_finite(self)
    }
}

/// Machine epsilon `2^-p` at the working precision, expressed as `T`.
pub fn epsilon<T: Real>(precision_bits: u32) -> T {
    T::seed(precision_bits, 1.0).exp2_of(-(precision_bits as i64))
}
