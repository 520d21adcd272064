//! Exact rational values.
//!
//! Every quantity in this crate (valuation entries, prices, interaction
//! terms, matching weights) is a [`Value`]: a rational with 64-bit numerator
//! and denominator kept in lowest terms. Arithmetic is checked; overflow
//! surfaces as [`Overflow`] instead of wrapping.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arithmetic on [`Value`]s left the representable range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("arithmetic overflow in exact rational computation")]
pub struct Overflow;

/// Exact rational number in lowest terms with a positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Value(Ratio<i64>);

impl Value {
    pub const ZERO: Value = Value(Ratio::new_raw(0, 1));
    pub const ONE: Value = Value(Ratio::new_raw(1, 1));

    pub fn int(n: i64) -> Self {
        Value(Ratio::from_integer(n))
    }

    /// `numer / denom`, reduced. Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        Value(Ratio::new(numer, denom))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// The integer value, if the denominator is one.
    pub fn to_integer(&self) -> Option<i64> {
        self.is_integer().then(|| self.numer())
    }

    pub fn checked_add(self, rhs: Value) -> Result<Value, Overflow> {
        if self.is_integer() && rhs.is_integer() {
            return self
                .numer()
                .checked_add(rhs.numer())
                .map(Value::int)
                .ok_or(Overflow);
        }
        self.0.checked_add(&rhs.0).map(Value).ok_or(Overflow)
    }

    pub fn checked_sub(self, rhs: Value) -> Result<Value, Overflow> {
        if self.is_integer() && rhs.is_integer() {
            return self
                .numer()
                .checked_sub(rhs.numer())
                .map(Value::int)
                .ok_or(Overflow);
        }
        self.0.checked_sub(&rhs.0).map(Value).ok_or(Overflow)
    }

    pub fn checked_mul(self, rhs: Value) -> Result<Value, Overflow> {
        if self.is_integer() && rhs.is_integer() {
            return self
                .numer()
                .checked_mul(rhs.numer())
                .map(Value::int)
                .ok_or(Overflow);
        }
        self.0.checked_mul(&rhs.0).map(Value).ok_or(Overflow)
    }

    pub fn checked_neg(self) -> Result<Value, Overflow> {
        self.numer()
            .checked_neg()
            .map(|n| Value(Ratio::new_raw(n, self.denom())))
            .ok_or(Overflow)
    }

    /// Division by a nonzero value. Panics on a zero divisor.
    pub fn checked_div(self, rhs: Value) -> Result<Value, Overflow> {
        assert!(!rhs.is_zero(), "division by zero");
        // a/b / (c/d) = (a/g1 * d/g2) / (b/g2 * c/g1)
        let (a, b) = (self.numer(), self.denom());
        let (c, d) = (rhs.numer(), rhs.denom());
        let g1 = a.gcd(&c).max(1);
        let g2 = b.gcd(&d).max(1);
        let num = (a / g1).checked_mul(d / g2).ok_or(Overflow)?;
        let den = (b / g2).checked_mul(c / g1).ok_or(Overflow)?;
        if den < 0 {
            let num = num.checked_neg().ok_or(Overflow)?;
            let den = den.checked_neg().ok_or(Overflow)?;
            return Ok(Value(Ratio::new(num, den)));
        }
        Ok(Value(Ratio::new(num, den)))
    }

    /// Sum of an iterator of values, checked.
    pub fn sum<I: IntoIterator<Item = Value>>(iter: I) -> Result<Value, Overflow> {
        iter.into_iter()
            .try_fold(Value::ZERO, |acc, x| acc.checked_add(x))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::int(n)
    }
}

impl From<i32> for Value {
    fn from(n: i32) -> Self {
        Value::int(n as i64)
    }
}

/// Canonical text form: `n` for integers, `p/q` otherwise.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseValueError {
    #[error("empty value")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("`{0}` is not in canonical form")]
    NonCanonical(String),
}

fn parse_canonical_int(s: &str) -> Result<i64, ParseValueError> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseValueError::Malformed(s.to_string()));
    }
    if (digits.len() > 1 && digits.starts_with('0')) || s == "-0" {
        return Err(ParseValueError::NonCanonical(s.to_string()));
    }
    s.parse::<i64>()
        .map_err(|_| ParseValueError::Malformed(s.to_string()))
}

/// Strict parser: accepts only the canonical forms produced by `Display`
/// (no `+`, no leading zeros, no `-0`, denominators greater than one and
/// coprime to the numerator).
impl FromStr for Value {
    type Err = ParseValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(ParseValueError::Empty);
        }
        match s.split_once('/') {
            None => Ok(Value::int(parse_canonical_int(s)?)),
            Some((p, q)) => {
                let numer = parse_canonical_int(p)?;
                if q.starts_with('-') {
                    return Err(ParseValueError::NonCanonical(s.to_string()));
                }
                let denom = parse_canonical_int(q)?;
                if denom <= 1 || numer.gcd(&denom) != 1 {
                    return Err(ParseValueError::NonCanonical(s.to_string()));
                }
                Ok(Value(Ratio::new_raw(numer, denom)))
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lowest_terms() {
        let v = Value::new(6, -4);
        assert_eq!(v.numer(), -3);
        assert_eq!(v.denom(), 2);
        assert_eq!(v.to_string(), "-3/2");
    }

    #[test]
    fn overflow_is_reported() {
        let big = Value::int(i64::MAX);
        assert_eq!(big.checked_add(Value::ONE), Err(Overflow));
        assert_eq!(Value::int(i64::MIN).checked_neg(), Err(Overflow));
        let half = Value::new(1, 2);
        assert!(Value::new(i64::MAX, 3).checked_add(half).is_err());
    }

    #[test]
    fn canonical_parsing() {
        assert_eq!("5".parse::<Value>().unwrap(), Value::int(5));
        assert_eq!("-7/2".parse::<Value>().unwrap(), Value::new(-7, 2));
        for bad in ["2/4", "3/1", "-0", "+3", "007", "1/-2", "1/0", "", "x", "1/2/3"] {
            assert!(bad.parse::<Value>().is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn division() {
        let a = Value::new(3, 4);
        let b = Value::new(-9, 2);
        assert_eq!(a.checked_div(b).unwrap(), Value::new(-1, 6));
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
            let v = Value::new(n, d);
            prop_assert_eq!(v.to_string().parse::<Value>().unwrap(), v);
        }

        #[test]
        fn add_sub_inverse(a in -1000i64..1000, b in 1i64..50, c in -1000i64..1000, d in 1i64..50) {
            let x = Value::new(a, b);
            let y = Value::new(c, d);
            prop_assert_eq!(x.checked_add(y).unwrap().checked_sub(y).unwrap(), x);
            prop_assert_eq!(x.checked_add(y).unwrap(), y.checked_add(x).unwrap());
        }
    }
}
