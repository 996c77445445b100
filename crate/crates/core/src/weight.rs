//! Exact non-negative rational used for every coefficient.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Weight(Ratio<i64>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightParseError {
    #[error("`{0}` is not a decimal or fraction")]
    Syntax(String),
    #[error("`{0}` is negative")]
    Negative(String),
    #[error("`{0}` overflows the supported precision")]
    Overflow(String),
}

impl Weight {
    pub const ZERO: Weight = Weight(Ratio::new_raw(0, 1));
    pub const HALF: Weight = Weight(Ratio::new_raw(1, 2));

    pub fn from_integer(n: i64) -> Self {
        Weight(Ratio::from_integer(n))
    }

    pub fn count(n: usize) -> Self {
        Weight::from_integer(n as i64)
    }

    /// Half of `n`: the contribution of `n` synonym matches.
    pub fn halves(n: usize) -> Self {
        Weight(Ratio::new(n as i64, 2))
    }

    pub fn new(numer: i64, denom: i64) -> Self {
        Weight(Ratio::new(numer, denom))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    /// Lossy view for display or plotting only.
    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// Shortest exact decimal, or `n/d` when the expansion does not
    /// terminate.
    pub fn to_decimal_string(&self) -> String {
        let (n, d) = (self.numer(), self.denom());
        let mut rest = d;
        let (mut twos, mut fives) = (0u32, 0u32);
        while rest % 2 == 0 {
            rest /= 2;
            twos += 1;
        }
        while rest % 5 == 0 {
            rest /= 5;
            fives += 1;
        }
        if rest != 1 {
            return format!("{n}/{d}");
        }
        let digits = twos.max(fives);
        if digits == 0 {
            return n.to_string();
        }
        // n/d == n * 2^(k-twos) * 5^(k-fives) / 10^k
        let scale = 2i128.pow(digits - twos) * 5i128.pow(digits - fives);
        let scaled = n as i128 * scale;
        let pow = 10i128.pow(digits);
        let sign = if scaled < 0 { "-" } else { "" };
        let abs = scaled.abs();
        let frac = format!("{:0width$}", abs % pow, width = digits as usize);
        format!("{sign}{}.{}", abs / pow, frac.trim_end_matches('0'))
    }
}

impl FromStr for Weight {
    type Err = WeightParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let raw = s.trim();
        let syntax = || WeightParseError::Syntax(s.to_owned());
        let overflow = || WeightParseError::Overflow(s.to_owned());
        let value = if let Some((n, d)) = raw.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| syntax())?;
            let d: i64 = d.trim().parse().map_err(|_| syntax())?;
            if d == 0 {
                return Err(syntax());
            }
            Ratio::new(n, d)
        } else {
            let (negative, body) = match raw.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, raw.strip_prefix('+').unwrap_or(raw)),
            };
            let (int, frac) = body.split_once('.').unwrap_or((body, ""));
            if (int.is_empty() && frac.is_empty())
                || !int.chars().all(|c| c.is_ascii_digit())
                || !frac.chars().all(|c| c.is_ascii_digit())
            {
                return Err(syntax());
            }
            let digits = format!("{int}{frac}");
            let numer: i64 = digits.parse().map_err(|_| overflow())?;
            let denom = 10i64.checked_pow(frac.len() as u32).ok_or_else(overflow)?;
            let r = Ratio::new(numer, denom);
            if negative {
                -r
            } else {
                r
            }
        };
        if value.is_negative() {
            return Err(WeightParseError::Negative(s.to_owned()));
        }
        Ok(Weight(value))
    }
}

impl TryFrom<f64> for Weight {
    type Error = WeightParseError;

    /// Goes through the shortest round-trip decimal, so `2.5` maps to 5/2
    /// rather than its binary expansion.
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        if !v.is_finite() {
            return Err(WeightParseError::Syntax(v.to_string()));
        }
        format!("{v}").parse()
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_decimal_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight(self.0 + rhs.0)
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        self.0 += rhs.0;
    }
}

impl Mul for Weight {
    type Output = Weight;
    fn mul(self, rhs: Weight) -> Weight {
        Weight(self.0 * rhs.0)
    }
}

impl Div<usize> for Weight {
    type Output = Weight;
    fn div(self, rhs: usize) -> Weight {
        Weight(self.0 / rhs as i64)
    }
}

impl Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Weight> for Weight {
    fn sum<I: Iterator<Item = &'a Weight>>(iter: I) -> Weight {
        iter.copied().sum()
    }
}
