//! Exact rational numbers and their textual forms.
//!
//! Every utility, payoff, weight and LP coefficient in the crate is a
//! [`Rational`]. Floating point never enters a certification path; it is only
//! used when a report wants an approximate rendering.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Arbitrary-precision fraction in canonical form (positive denominator,
/// numerator and denominator coprime).
pub type Rational = num_rational::BigRational;

/// Maximum number of fractional digits accepted in a decimal literal.
pub const MAX_DECIMAL_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot read {input:?} as an exact rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn frac(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p/q"`, a plain integer, or a decimal literal with at most
/// [`MAX_DECIMAL_DIGITS`] fractional digits. Decimals are converted exactly.
pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    let input = text.trim();
    let fail = |reason| ParseRationalError {
        input: text.to_string(),
        reason,
    };
    if input.is_empty() {
        return Err(fail("empty string"));
    }
    if let Some((p, q)) = input.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| fail("bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| fail("bad denominator"))?;
        if q.is_zero() {
            return Err(fail("zero denominator"));
        }
        return Ok(Rational::new(p, q));
    }
    if input.contains(['e', 'E']) {
        return Err(fail("exponent notation is not accepted"));
    }
    match input.split_once('.') {
        None => input
            .parse::<BigInt>()
            .map(Rational::from_integer)
            .map_err(|_| fail("not an integer")),
        Some((whole, digits)) => {
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(fail("bad fractional part"));
            }
            if digits.len() > MAX_DECIMAL_DIGITS {
                return Err(fail("more than 6 fractional digits"));
            }
            let negative = whole.trim_start().starts_with('-');
            let whole = match whole.trim() {
                "" | "-" | "+" => BigInt::zero(),
                w => w.parse::<BigInt>().map_err(|_| fail("bad integer part"))?,
            };
            let scale = BigInt::from(10u32).pow(digits.len() as u32);
            let tail: BigInt = digits.parse().map_err(|_| fail("bad fractional part"))?;
            let magnitude = whole.abs() * &scale + tail;
            let numer = if negative { -magnitude } else { magnitude };
            Ok(Rational::new(numer, scale))
        }
    }
}

/// Canonical text: `"p/q"`, or `"p"` for integers.
pub fn to_text(value: &Rational) -> String {
    value.to_string()
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn pow(base: &Rational, exp: i32) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

/// Serde adapter that writes rationals as canonical strings and reads any of
/// the accepted literal forms (JSON numbers included).
pub mod serde_text {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&to_text(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let raw = serde_json::Value::deserialize(deserializer)?;
        from_json(&raw).map_err(serde::de::Error::custom)
    }

    pub fn from_json(raw: &serde_json::Value) -> Result<Rational, ParseRationalError> {
        match raw {
            serde_json::Value::String(s) => parse(s),
            // arbitrary_precision keeps the literal text of the number.
            serde_json::Value::Number(n) => parse(&n.to_string()),
            other => Err(ParseRationalError {
                input: other.to_string(),
                reason: "expected a number or a fraction string",
            }),
        }
    }
}

/// Vector of rationals rendered as a compact `[a, b, c]` list.
pub struct Row<'a>(pub &'a [Rational]);

impl fmt::Display for Row<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, value) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{value}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse("-4").unwrap(), int(-4));
        assert_eq!(parse("1.01").unwrap(), frac(101, 100));
        assert_eq!(parse("-0.25").unwrap(), frac(-1, 4));
        assert_eq!(parse("-.5").unwrap(), frac(-1, 2));
        assert_eq!(parse("0.000001").unwrap(), frac(1, 1_000_000));
    }

    #[test]
    fn rejects_inexact_or_malformed_literals() {
        assert!(parse("0.0000001").is_err());
        assert!(parse("1e3").is_err());
        assert!(parse("1/0").is_err());
        assert!(parse("").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("1.").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        for text in ["0", "7", "-3/4", "22/7"] {
            assert_eq!(to_text(&parse(text).unwrap()), text);
        }
    }

    #[test]
    fn negative_powers() {
        assert_eq!(pow(&int(4), -1), frac(1, 4));
        assert_eq!(pow(&int(4), 0), int(1));
        assert_eq!(pow(&int(4), 2), int(16));
    }
}
