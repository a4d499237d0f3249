//! Probability inputs and multi-precision helpers.
//!
//! A probability is given either as an exact rational (`"1/3"`, `"2"`,
//! `"0"`) or as a decimal string (`"0.37"`, `"2.5e-1"`). The two forms select
//! different backends: exact rationals run through integer arithmetic, decimals
//! through MPFR floats at [`precision_bits`] bits. Nothing converts between the
//! two silently.

use std::fmt;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Environment variable overriding the working float precision.
pub const PRECISION_ENV: &str = "ELO_PRECISION_BITS";

/// Default float precision in bits.
pub const DEFAULT_PRECISION: u32 = 128;

/// Smallest precision accepted from the environment.
pub const MIN_PRECISION: u32 = 64;

/// Working float precision: `ELO_PRECISION_BITS` if set and valid, else 128.
pub fn precision_bits() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .map(|bits| bits.max(MIN_PRECISION))
        .unwrap_or(DEFAULT_PRECISION)
}

/// A user-supplied probability together with the backend it selects.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbInput {
    /// `r/s` or an integer literal.
    Exact(Rational),
    /// A decimal literal evaluated at the working precision.
    Decimal { text: String, value: Float },
}

impl ProbInput {
    /// Parses `text` and validates `0 <= p <= 1`.
    pub fn parse(text: &str, precision: u32) -> Result<Self> {
        let trimmed = text.trim();
        let looks_decimal = trimmed.contains(['.', 'e', 'E']) && !trimmed.contains('/');
        let parsed = if looks_decimal {
            let exact = decimal_to_rational(trimmed)?;
            check_probability(&exact)?;
            let value = Float::with_val(
                precision,
                Float::parse(trimmed).map_err(|e| Error::Parse {
                    input: text.to_string(),
                    reason: e.to_string(),
                })?,
            );
            ProbInput::Decimal {
                text: trimmed.to_string(),
                value,
            }
        } else {
            let exact: Rational = trimmed.parse().map_err(|e: rug::rational::ParseRationalError| {
                Error::Parse {
                    input: text.to_string(),
                    reason: e.to_string(),
                }
            })?;
            check_probability(&exact)?;
            ProbInput::Exact(exact)
        };
        Ok(parsed)
    }

    /// Name of the backend this input selects.
    pub fn backend(&self) -> &'static str {
        match self {
            ProbInput::Exact(_) => "rational",
            ProbInput::Decimal { .. } => "decimal",
        }
    }

    /// The exact rational value of the literal (a decimal string denotes a
    /// terminating fraction).
    pub fn as_rational(&self) -> Rational {
        match self {
            ProbInput::Exact(r) => r.clone(),
            ProbInput::Decimal { text, .. } => {
                decimal_to_rational(text).expect("validated at parse time")
            }
        }
    }

    /// The value as a float at `precision` bits.
    pub fn to_float(&self, precision: u32) -> Float {
        match self {
            ProbInput::Exact(r) => Float::with_val(precision, r),
            ProbInput::Decimal { value, .. } => Float::with_val(precision, value),
        }
    }
}

impl fmt::Display for ProbInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbInput::Exact(r) => write!(f, "{r}"),
            ProbInput::Decimal { text, .. } => f.write_str(text),
        }
    }
}

pub(crate) fn check_probability(p: &Rational) -> Result<()> {
    if *p < 0 || *p > 1 {
        return Err(Error::ProbabilityOutOfRange(p.to_string()));
    }
    Ok(())
}

pub(crate) fn check_float_probability(p: &Float) -> Result<()> {
    if p.is_nan() || *p < 0 || *p > 1 {
        return Err(Error::ProbabilityOutOfRange(p.to_string()));
    }
    Ok(())
}

/// Exact value of a decimal literal such as `-1.25e-3`.
pub fn decimal_to_rational(text: &str) -> Result<Rational> {
    let err = |reason: &str| Error::Parse {
        input: text.to_string(),
        reason: reason.to_string(),
    };
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = text[pos + 1..]
                .parse()
                .map_err(|_| err("bad exponent"))?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err("unexpected character"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(digits.parse::<Integer>().map_err(|_| err("bad digits"))?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Integer::from(10);
    if scale >= 0 {
        value *= ten.pow(scale as u32);
    } else {
        value /= ten.pow(scale.unsigned_abs());
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Scientific-notation rendering with `digits` significant digits.
pub fn float_to_decimal(value: &Float, digits: usize) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    value.to_string_radix_round(10, Some(digits), Round::Nearest)
}

/// Decimal rendering of an exact rational with `digits` significant digits.
pub fn rational_to_decimal(value: &Rational, digits: usize) -> String {
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16;
    float_to_decimal(&Float::with_val(bits, value), digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_as_exact() {
        let p = ProbInput::parse("2/6", 128).unwrap();
        assert_eq!(p, ProbInput::Exact(Rational::from((1, 3))));
        assert_eq!(p.backend(), "rational");
    }

    #[test]
    fn parses_decimal_as_float_backend() {
        let p = ProbInput::parse("0.37", 128).unwrap();
        assert_eq!(p.backend(), "decimal");
        assert_eq!(p.as_rational(), Rational::from((37, 100)));
        assert_eq!(p.to_string(), "0.37");
    }

    #[test]
    fn decimal_exponents() {
        assert_eq!(decimal_to_rational("2.5e-1").unwrap(), Rational::from((1, 4)));
        assert_eq!(decimal_to_rational(".5").unwrap(), Rational::from((1, 2)));
        assert_eq!(decimal_to_rational("-1E2").unwrap(), Rational::from(-100));
        assert!(decimal_to_rational("1.2.3").is_err());
        assert!(decimal_to_rational("e5").is_err());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            ProbInput::parse("3/2", 128),
            Err(Error::ProbabilityOutOfRange(_))
        ));
        assert!(matches!(
            ProbInput::parse("-0.1", 128),
            Err(Error::ProbabilityOutOfRange(_))
        ));
        assert!(ProbInput::parse("abc", 128).is_err());
    }

    #[test]
    fn decimal_rendering() {
        let r = Rational::from((63, 256));
        assert_eq!(rational_to_decimal(&r, 8), "2.4609375e-1");
    }
}
