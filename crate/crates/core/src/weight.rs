//! Exact rational weights.
//!
//! Every predicate in this crate compares cumulative sums against zero or
//! against each other, so weights are arbitrary-precision rationals and all
//! arithmetic is exact. Floating point never appears.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A nonzero exact rational. The sign decides the vertex color
/// (positive = black, negative = white).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(BigRational);

impl Weight {
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::ZeroWeight(value.to_string()));
        }
        Ok(Weight(value))
    }

    pub fn from_int(n: i64) -> Result<Self> {
        Self::new(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Self::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> BigRational {
        self.0.abs()
    }

    /// Parses `a` or `a/b`, optionally negative. Rejects zero.
    pub fn parse(token: &str) -> Result<Self> {
        let rat = parse_rational(token)?;
        if rat.is_zero() {
            return Err(Error::ZeroWeight(token.to_string()));
        }
        Ok(Weight(rat))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.0))
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses a rational literal `a` or `a/b` with an optional leading `-`.
pub fn parse_rational(token: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad rational `{token}`"));
    if token.is_empty() {
        return Err(bad());
    }
    match token.split_once('/') {
        Some((num, den)) => {
            let num = BigInt::from_str(num).map_err(|_| bad())?;
            let den = BigInt::from_str(den).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(num, den))
        }
        None => {
            let num = BigInt::from_str(token).map_err(|_| bad())?;
            Ok(BigRational::from_integer(num))
        }
    }
}

/// Prints a rational as `a` when integral and `a/b` otherwise.
pub fn format_rational(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Total order used throughout the crate for sorting weights.
pub fn cmp_rational(a: &BigRational, b: &BigRational) -> Ordering {
    a.cmp(b)
}
