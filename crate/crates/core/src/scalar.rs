//! Coefficient types for operator expansions.
//!
//! Exact rationals are the default everywhere on the symbolic side; `f64`
//! shows up in the Fock-space oracle and when an irrational scale is asked
//! for. Complex coefficients are supported through `Complex64`, which is
//! mostly useful for checking that the adjoint conjugates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Arbitrary-precision rational, always stored gcd-reduced with a positive
/// denominator.
pub type Rational = BigRational;

/// A ring of coefficients for [`Element`](crate::algebra::Element).
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Complex conjugate; the identity on real types.
    fn conj(&self) -> Self;

    fn from_bigint(n: &BigInt) -> Self;

    fn from_rational(q: &Rational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_bigint(&BigInt::from(n))
    }
}

/// Coefficients that embed in the reals, so they can be put into a numeric
/// matrix.
pub trait RealCoeff: Coeff + PartialOrd {
    fn to_f64(&self) -> f64;
}

impl Coeff for Rational {
    fn conj(&self) -> Self {
        self.clone()
    }

    fn from_bigint(n: &BigInt) -> Self {
        Rational::from_integer(n.clone())
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
}

impl RealCoeff for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Coeff for f64 {
    fn conj(&self) -> Self {
        *self
    }

    fn from_bigint(n: &BigInt) -> Self {
        n.to_f64().unwrap_or(f64::NAN)
    }

    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
}

impl RealCoeff for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coeff for Complex64 {
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn from_bigint(n: &BigInt) -> Self {
        Complex64::new(n.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_rational(q: &Rational) -> Self {
        Complex64::new(ToPrimitive::to_f64(q).unwrap_or(f64::NAN), 0.0)
    }
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"-3"`, `"3/2"` or a plain decimal such as `"0.125"` into an exact
/// rational. Decimals are converted digit-for-digit, never through `f64`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = parse_int(num)?;
        let den: BigInt = den.parse().ok()?;
        if den.is_zero() || den < BigInt::zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let combined: BigInt = format!("{digits}{frac}").parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(combined, scale);
        return Some(if negative { -value } else { value });
    }
    parse_int(text).map(Rational::from_integer)
}

fn parse_int(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// Relative comparison with an absolute floor, used wherever a numeric result
/// is checked against an exact one.
pub fn approx_eq(actual: f64, expected: f64, rel: f64, abs_floor: f64) -> bool {
    let diff = (actual - expected).abs();
    diff <= abs_floor || diff <= rel * expected.abs().max(actual.abs())
}

pub const REL_TOL: f64 = 1e-9;
pub const ABS_TOL: f64 = 1e-12;
