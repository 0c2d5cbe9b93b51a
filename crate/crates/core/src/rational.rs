//! Exact rational arithmetic helpers.
//!
//! All probabilities and expectations in this crate are `BigRational`s:
//! arbitrary-precision fractions kept in lowest terms with a positive
//! denominator. No floating point is used anywhere in the analysis, so
//! verdicts involving probabilities of very different magnitudes (say
//! `1/1000000` next to `19/20`) are decided exactly.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for building a rational from machine integers.
///
/// Panics if `denom` is zero.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?}")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses an exact rational from a string.
///
/// Accepted forms are integers (`"3"`), fractions (`"97/2000"`) and
/// terminating decimals (`"0.0485"`, parsed exactly). Anything else,
/// including scientific notation and repeating-decimal notation, is
/// rejected rather than rounded.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return Err(ParseRationalError::Invalid(input.to_string()));
    }

    let invalid = || ParseRationalError::Invalid(input.to_string());
    let magnitude = if let Some((numer, denom)) = body.split_once('/') {
        let n: BigInt = parse_digits(numer).ok_or_else(invalid)?;
        let d: BigInt = parse_digits(denom).ok_or_else(invalid)?;
        if d.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(input.to_string()));
        }
        Rational::new(n, d)
    } else if let Some((whole, frac)) = body.split_once('.') {
        // Terminating decimal: whole.frac == (whole*10^k + frac) / 10^k.
        if whole.is_empty() && frac.is_empty() {
            return Err(invalid());
        }
        let w: BigInt = if whole.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(whole).ok_or_else(invalid)?
        };
        let f: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(frac).ok_or_else(invalid)?
        };
        let mut scale = BigInt::one();
        for _ in 0..frac.len() {
            scale *= 10;
        }
        Rational::new(w * &scale + f, scale)
    } else {
        Rational::from_integer(parse_digits(body).ok_or_else(invalid)?)
    };

    Ok(if sign < 0 { -magnitude } else { magnitude })
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Formats a rational as `"n"` or `"n/d"`; inverse of [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True iff `r` lies in the closed unit interval.
pub fn is_probability(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

use num::Signed;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("97/2000").unwrap(), rat(97, 2000));
        assert_eq!(parse_rational("3").unwrap(), rat_int(3));
        assert_eq!(parse_rational("0").unwrap(), Rational::zero());
        assert_eq!(parse_rational("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
    }

    #[test]
    fn parses_terminating_decimals_exactly() {
        assert_eq!(parse_rational("0.0485").unwrap(), rat(97, 2000));
        assert_eq!(parse_rational("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(".25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("2.").unwrap(), rat_int(2));
        assert_eq!(parse_rational("1.2").unwrap(), rat(6, 5));
        assert_eq!(parse_rational("0.00001").unwrap(), rat(1, 100_000));
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", " ", "a", "1/0", "1e-3", "1/2/3", "0.3333...", "1 2", "."] {
            assert!(parse_rational(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn formats_integers_without_denominator() {
        assert_eq!(format_rational(&rat_int(1)), "1");
        assert_eq!(format_rational(&rat(1, 2)), "1/2");
        assert_eq!(format_rational(&rat(-3, 7)), "-3/7");
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = rat(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
