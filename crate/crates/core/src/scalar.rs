//! Distance values.
//!
//! Everything above this module is generic over [`Scalar`], which is
//! implemented for `f64` (compared with an absolute slack of [`FLOAT_TOL`])
//! and for [`BigRational`] (compared exactly).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Comparison slack used in float mode.
pub const FLOAT_TOL: f64 = 1e-9;

/// A totally ordered field of distance values.
pub trait Scalar:
    Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static + Signed + FromPrimitive
{
    /// `true` for exact arithmetic.
    const EXACT: bool;

    /// Slack allowed in non-strict comparisons.
    fn tolerance() -> Self;

    fn to_f64_lossy(&self) -> f64;

    /// Reads a JSON number (decimal literal) or a `"p/q"` string.
    fn from_json(value: &Value) -> Result<Self>;

    fn to_json(&self) -> Value;

    /// `self * k` for a small integer constant.
    fn times(&self, k: u32) -> Self {
        Self::from_u32(k).expect("small integer is representable") * self.clone()
    }

    /// `self <= other` up to the tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        *self <= other.clone() + Self::tolerance()
    }

    /// `|self - other| <= tolerance`.
    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }
}

/// `serialize_with` adapter writing a scalar through [`Scalar::to_json`].
pub fn serialize<S: Scalar, Z: serde::Serializer>(value: &S, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
    serde::Serialize::serialize(&value.to_json(), serializer)
}

/// Maximum of a sequence; `zero` when empty. Callers only feed it
/// non-negative defects or sequences containing a zero term.
pub fn max_or_zero<S: Scalar, I: IntoIterator<Item = S>>(items: I) -> S {
    items
        .into_iter()
        .fold(S::zero(), |acc, v| if v > acc { v } else { acc })
}

pub fn max2<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

/// Minimum with its lowest index. Ties keep the earlier item.
pub fn argmin<S: Scalar, I: IntoIterator<Item = S>>(items: I) -> Option<(usize, S)> {
    let mut best: Option<(usize, S)> = None;
    for (i, v) in items.into_iter().enumerate() {
        match &best {
            Some((_, b)) if v >= *b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        FLOAT_TOL
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("number {n} is not representable"))),
            Value::String(s) => {
                let r = parse_rational(s)?;
                r.to_f64()
                    .ok_or_else(|| Error::Parse(format!("{s} is not representable")))
            }
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }

    fn to_json(&self) -> Value {
        if self.is_finite() {
            serde_json::Number::from_f64(*self)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        } else if *self > 0.0 {
            Value::String("inf".into())
        } else {
            Value::String("-inf".into())
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_json(value: &Value) -> Result<Self> {
        match value {
            // `arbitrary_precision` keeps the literal text, so decimals stay exact.
            Value::Number(n) => parse_decimal(&n.to_string()),
            Value::String(s) => parse_rational(s),
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
}

/// Parses `"p/q"`, `"p"` or a decimal literal into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        Ok(BigRational::new(p, q))
    } else {
        parse_decimal(text)
    }
}

/// Exact value of a decimal literal such as `-1.25e-3`.
pub fn parse_decimal(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad decimal literal {text:?}"));
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (
            &text[..pos],
            text[pos + 1..].parse::<i32>().map_err(|_| bad())?,
        ),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = digits.parse().map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let shift = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    Ok(if shift >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-shift) as usize))
    })
}
