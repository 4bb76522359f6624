//! Exact rational values and the extended (possibly infinite) cost domain.
//!
//! Every cost in the crate is exact. Finite values are `Ratio<i128>`; the
//! workspace builds with overflow checks enabled so that an overflow aborts
//! instead of silently producing a wrong comparison.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub type Rational = Ratio<i128>;

pub fn int(v: i128) -> Rational {
    Rational::from_integer(v)
}

pub fn frac(numer: i128, denom: i128) -> Rational {
    Rational::new(numer, denom)
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn format_fraction(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_fraction(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::ParseRational(s.to_string());
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i128 = p.trim().parse().map_err(|_| bad())?;
            let q: i128 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => s.parse::<i128>().map(int).map_err(|_| bad()),
    }
}

/// A rational extended by a single `Infinite` value ordered above every
/// finite one. Used for distances and costs in disconnected networks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Extended {
    Finite(Rational),
    Infinite,
}

impl Extended {
    pub fn zero() -> Self {
        Extended::Finite(Rational::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            Extended::Finite(r) => Some(*r),
            Extended::Infinite => None,
        }
    }

    /// `self - other` for `other` finite or both infinite-free; an infinite
    /// minuend over a finite subtrahend yields `Infinite`.
    ///
    /// Returns `None` for the undefined `Infinite - Infinite` and for a finite
    /// minuend with an infinite subtrahend.
    pub fn checked_sub(&self, other: &Extended) -> Option<Extended> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Some(Extended::Finite(a - b)),
            (Extended::Infinite, Extended::Finite(_)) => Some(Extended::Infinite),
            _ => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Extended::Finite(r) => r.is_positive(),
            Extended::Infinite => true,
        }
    }
}

impl From<Rational> for Extended {
    fn from(r: Rational) -> Self {
        Extended::Finite(r)
    }
}

impl From<Option<u64>> for Extended {
    fn from(d: Option<u64>) -> Self {
        match d {
            Some(d) => Extended::Finite(int(d as i128)),
            None => Extended::Infinite,
        }
    }
}

impl Ord for Extended {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Ordering::Less,
            (Extended::Infinite, Extended::Finite(_)) => Ordering::Greater,
            (Extended::Infinite, Extended::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Extended {
    type Output = Extended;

    fn add(self, rhs: Extended) -> Extended {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinite,
        }
    }
}

impl Add<Rational> for Extended {
    type Output = Extended;

    fn add(self, rhs: Rational) -> Extended {
        self + Extended::Finite(rhs)
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(r) => f.write_str(&format_fraction(r)),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Extended {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "inf" | "INF" | "infinity" => Ok(Extended::Infinite),
            other => parse_fraction(other).map(Extended::Finite),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "fraction")]` for plain `Rational` fields.
pub mod fraction {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_fraction(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_fraction(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "fraction_opt")]` for `Option<Rational>` fields.
pub mod fraction_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_fraction(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_fraction(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// `#[serde(with = "fraction_vec")]` for `Vec<Rational>` fields.
pub mod fraction_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_fraction))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_fraction(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
