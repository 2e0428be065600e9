//! Scalar abstraction shared by every kernel in the crate.
//!
//! Kernels are written once against [`Scalar`] and instantiated for `f64`,
//! `f32` and exact [`BigRational`] arithmetic. Float sums use Neumaier
//! compensation; rational sums are exact.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// True when arithmetic on this type is exact.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_f64(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Sum in iteration order. Float impls compensate rounding.
    fn sum_iter<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        iter.into_iter().fold(Self::zero(), |acc, x| acc + x)
    }

    fn from_int(value: i64) -> Self {
        Self::from_ratio(value, 1)
    }

    fn from_count(count: u64, total: u64) -> Self {
        let g = num_integer::gcd(count, total.max(1));
        let (n, d) = if g == 0 { (0, 1) } else { (count / g, total / g) };
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Self::from_ratio(n, d),
            _ => Self::from_f64(count as f64 / total as f64),
        }
    }

    /// Parse a decimal literal (`-0.125`, `3`) or a fraction `p/q`.
    fn parse_literal(text: &str) -> Result<Self>;
}

fn neumaier<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn parse_fraction(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse {
        position: 0,
        message: format!("not a number: {text:?}"),
    };
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = BigRational::new(numer, denom);
    Ok(if neg { -value } else { value })
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(value: f64) -> Self {
        value
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sum_iter<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        neumaier(iter)
    }

    fn parse_literal(text: &str) -> Result<Self> {
        if text.contains('/') {
            return Ok(ToPrimitive::to_f64(&parse_fraction(text)?).unwrap_or(f64::NAN));
        }
        text.trim().parse::<f64>().map_err(|_| Error::Parse {
            position: 0,
            message: format!("not a number: {text:?}"),
        })
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_f64(value: f64) -> Self {
        value as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn sum_iter<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        neumaier(iter.into_iter().map(f64::from)) as f32
    }

    fn parse_literal(text: &str) -> Result<Self> {
        f64::parse_literal(text).map(|v| v as f32)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    /// Exact binary expansion of the float; non-finite input maps to zero.
    fn from_f64(value: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(value).unwrap_or_else(BigRational::zero)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_literal(text: &str) -> Result<Self> {
        parse_fraction(text)
    }
}

/// Mean of `count` values given their (already accumulated) sum.
pub fn mean_of<T: Scalar>(sum: T, count: usize) -> T {
    sum / T::from_int(count as i64)
}

/// Integer power by repeated squaring, valid for any ring scalar.
pub fn powi<T: Scalar>(base: &T, exp: u32) -> T {
    let mut result = T::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = result * b.clone();
        }
        e >>= 1;
        if e > 0 {
            b = b.clone() * b;
        }
    }
    result
}

/// Takes the `2^k`-th root of a mean that is nonnegative in exact arithmetic.
///
/// Float noise down to `-1e-12` is clamped to zero; anything more negative
/// indicates a broken kernel and is reported as an error.
pub fn nonnegative_root(power: f64, exponent: u32) -> Result<f64> {
    if power < -1e-12 || power.is_nan() {
        return Err(Error::NegativeMean(power));
    }
    let p = power.max(0.0);
    Ok(p.powf(1.0 / f64::from(exponent)))
}
