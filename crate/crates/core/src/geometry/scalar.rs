//! Scalar types shared by the exact (rational) and floating-point code paths.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::LabError;

/// Exact rational used for all one-dimensional interval and arc work.
pub type Rational = Ratio<i128>;

/// Arithmetic needed by [`ArcUnion`](super::ArcUnion) and the 1D maps.
pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn floor(self) -> Self;
    fn to_f64(self) -> f64;

    /// Representative of `self` in `[0, 1)`.
    fn frac(self) -> Self {
        self - self.floor()
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn frac(self) -> Self {
        let r = self - self.floor();
        // x - floor(x) can round up to exactly 1.0 for tiny negative x
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        <Ratio<i128> as Zero>::zero()
    }
    fn one() -> Self {
        Ratio::from_integer(1)
    }
    fn from_int(n: i64) -> Self {
        Ratio::from_integer(n as i128)
    }
    fn floor(self) -> Self {
        Ratio::floor(&self)
    }
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

pub fn rat(numer: i128, denom: i128) -> Rational {
    Ratio::new(numer, denom)
}

/// Parses `"p/q"`, an integer, or a finite decimal (`"-0.625"`, `"1e-3"`) exactly.
pub fn parse_rational(text: &str) -> Result<Rational, LabError> {
    let s = text.trim();
    let bad = || LabError::Config(format!("cannot parse '{text}' as an exact rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| bad())?;
        let q: i128 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let negative = mantissa.starts_with('-');
    let digits = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: i128 = all.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    if scale.abs() > 30 {
        return Err(bad());
    }
    let mut value = if scale >= 0 {
        Ratio::from_integer(numer * 10i128.pow(scale as u32))
    } else {
        Ratio::new(numer, 10i128.pow((-scale) as u32))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// `"p/q"` (or `"p"` for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i128 {
    values
        .into_iter()
        .fold(1i128, |acc, r| acc.lcm(r.denom()))
}

/// Nearest rational with denominator `denom` (used to snap float parameters).
pub fn snap_to_denominator(x: f64, denom: i128) -> Rational {
    Ratio::new((x * denom as f64).round() as i128, denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("3/10").unwrap(), rat(3, 10));
        assert_eq!(parse_rational("0.3").unwrap(), rat(3, 10));
        assert_eq!(parse_rational("-0.6").unwrap(), rat(-3, 5));
        assert_eq!(parse_rational("2").unwrap(), rat(2, 1));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn formats_as_p_over_q() {
        assert_eq!(format_rational(&rat(-6, 10)), "-3/5");
        assert_eq!(format_rational(&rat(4, 2)), "2");
    }

    #[test]
    fn frac_stays_in_unit_interval() {
        assert_eq!(Scalar::frac(rat(-1, 4)), rat(3, 4));
        assert_eq!(Scalar::frac(-1e-18f64), 0.0);
        assert_eq!(Scalar::frac(1.25f64), 0.25);
    }
}
