//! Probability scalars: exact rationals and `f64` behind one trait.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Tolerance for comparisons on floating-point slacks and rates.
pub const FLOAT_VERDICT_TOL: f64 = 1e-9;

/// Tolerance on the total mass of a floating-point distribution.
pub const FLOAT_MASS_TOL: f64 = 1e-12;

/// Arithmetic a probability mass must support.
///
/// Rationals compare exactly; `f64` comparisons use [`FLOAT_VERDICT_TOL`].
pub trait Prob:
    Clone
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + Signed
    + for<'a> std::ops::Add<&'a Self, Output = Self>
    + for<'a> std::ops::Mul<&'a Self, Output = Self>
{
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    fn from_rational(r: &Rational) -> Self;

    /// `self >= other` under the verdict rule of the scalar type.
    fn at_least(&self, other: &Self) -> bool;

    /// Whether a total mass is close enough to one.
    fn is_unit_total(&self) -> bool;

    fn from_count(n: u64) -> Self;
}

impl Prob for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(r: &Rational) -> Self {
        ratio_to_f64(r)
    }

    fn at_least(&self, other: &Self) -> bool {
        *self >= *other - FLOAT_VERDICT_TOL
    }

    fn is_unit_total(&self) -> bool {
        (*self - 1.0).abs() <= FLOAT_MASS_TOL
    }

    fn from_count(n: u64) -> Self {
        n as f64
    }
}

impl Prob for Rational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn at_least(&self, other: &Self) -> bool {
        self >= other
    }

    fn is_unit_total(&self) -> bool {
        self.is_one()
    }

    fn from_count(n: u64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
}

fn ratio_to_f64(r: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        return v;
    }
    // Fall back for numerators/denominators beyond f64 range.
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `3`, `-0.666`, `.5`, `1e-3`, `-2/3`, or `1.5/4` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty number".into());
    }
    match text.split_once('/') {
        Some((num, den)) => {
            let num = parse_decimal(num)?;
            let den = parse_decimal(den)?;
            if den.is_zero() {
                return Err(format!("zero denominator in `{text}`"));
            }
            Ok(num / den)
        }
        None => parse_decimal(text),
    }
}

fn parse_decimal(text: &str) -> Result<Rational, String> {
    let bad = || format!("not a number: `{text}`");
    let text = text.trim();
    let (negative, body) = match text.as_bytes().first() {
        Some(b'-') => (true, &text[1..]),
        Some(b'+') => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole
        .bytes()
        .chain(frac.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(digits);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// `15`, `3/2`, `-2/3`.
pub fn format_exact(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Shortest round-trip decimal of the nearest `f64`, with `-0` folded to `0`.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

pub(crate) fn one<T: Prob>() -> T {
    T::one()
}

pub(crate) fn zero<T: Prob>() -> T {
    T::zero()
}
