//! Scalar regimes.
//!
//! [`Rational`] values are arbitrary-precision fractions kept in lowest terms,
//! so identities checked over them hold exactly. `f64` values are restricted
//! to finite numbers when they enter a [`Matrix`](crate::Matrix).
//! Rational-to-float conversion rounds to nearest; there is deliberately no
//! conversion the other way.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Num, Signed, ToPrimitive};
use serde::{Serialize, Serializer};

use crate::determinants;
use crate::matrix::Matrix;

pub type Rational = num_rational::BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ExactRational,
    Float64,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::ExactRational => f.write_str("exact"),
            Regime::Float64 => f.write_str("float"),
        }
    }
}

/// Relative tolerance used by the float regime when comparing the two sides
/// of the symmetrizer relation `d_i a_ij = d_j a_ji`.
pub const FLOAT_RELATION_TOL: f64 = 1e-9;

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    const REGIME: Regime;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn is_finite_value(&self) -> bool;

    /// Equality of the two sides of a balance relation. Exact for rationals;
    /// `|x - y| <= 1e-9 * max(|x|, |y|)` for floats.
    fn balanced_eq(&self, other: &Self) -> bool;

    /// Determinant by the regime's elimination engine (fraction-free for
    /// rationals, partial pivoting for floats).
    fn determinant(m: &Matrix<Self>) -> Self;

    fn to_json(&self) -> serde_json::Value;
}

impl Scalar for Rational {
    const REGIME: Regime = Regime::ExactRational;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn balanced_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn determinant(m: &Matrix<Self>) -> Self {
        determinants::det_bareiss(m)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}

impl Scalar for f64 {
    const REGIME: Regime = Regime::Float64;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn balanced_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_RELATION_TOL * self.abs().max(other.abs())
    }

    fn determinant(m: &Matrix<Self>) -> Self {
        determinants::det_pivoted(m)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

/// Parses a rational literal: an integer, a fraction `p/q`, or a decimal with
/// optional exponent (`-1.25e-3`). Decimals are converted exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den == BigInt::from(0) {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str_radix(&all_digits, 10).ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

pub(crate) fn serialize_scalar<T: Scalar, S: Serializer>(
    value: &T,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    value.to_json().serialize(serializer)
}
