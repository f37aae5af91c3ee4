//! Rationals as they appear in files: a JSON integer or a `"p/q"` string.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sne_core::Rational;

/// One matrix entry, kept exactly as written so that files round-trip.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    /// Canonical text form: `"p"` for integers, `"p/q"` in lowest terms otherwise.
    pub fn exact(value: &Rational) -> Self {
        Number::Text(render(value))
    }

    pub fn to_rational(&self) -> Result<Rational, String> {
        match self {
            Number::Int(v) => Ok(Rational::from_integer(BigInt::from(*v))),
            Number::Text(s) => parse_rational(s),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(v) => write!(f, "{v}"),
            Number::Text(s) => f.write_str(s),
        }
    }
}

pub fn render(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p = BigInt::from_str(p).map_err(|_| format!("\"{text}\" is not an integer or p/q rational"))?;
    let q = BigInt::from_str(q).map_err(|_| format!("\"{text}\" is not an integer or p/q rational"))?;
    if q.is_zero() {
        return Err(format!("\"{text}\" has a zero denominator"));
    }
    Ok(Rational::new(p, q))
}

impl Serialize for Number {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        match self {
            Number::Int(v) => s.serialize_i64(*v),
            Number::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Number;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a \"p/q\" string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Number, E> {
                Ok(Number::Int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Number, E> {
                i64::try_from(v)
                    .map(Number::Int)
                    .or_else(|_| Ok(Number::Text(v.to_string())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Number, E> {
                Err(E::custom(format!("decimal {v} is not exact; write it as \"p/q\"")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Number, E> {
                Ok(Number::Text(v.to_owned()))
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_in_lowest_terms() {
        let r = parse_rational("6/-4").unwrap();
        assert_eq!(render(&r), "-3/2");
        assert_eq!(render(&parse_rational("8/4").unwrap()), "2");
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert!(parse_rational("3/0").unwrap_err().contains("zero denominator"));
        assert!(parse_rational("1.5").is_err());
    }

    #[test]
    fn decimals_are_refused_on_load() {
        assert!(serde_json::from_str::<Number>("0.5").is_err());
        assert_eq!(serde_json::from_str::<Number>("-7").unwrap(), Number::Int(-7));
        assert_eq!(
            serde_json::from_str::<Number>("\"1/2\"").unwrap(),
            Number::Text("1/2".into())
        );
    }
}
