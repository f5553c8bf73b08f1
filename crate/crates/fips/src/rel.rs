//! Exact rational reliabilities and probability masses.
//!
//! Quantile decisions ("is the cumulative mass at least the target
//! reliability?") are made with exact integer arithmetic. Floating point
//! enters only at the JSON boundary, where a reliability written as a short
//! decimal (e.g. `0.9999`) converts losslessly through its shortest decimal
//! representation.

use num_rational::Ratio;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// An exact probability mass in `[0, 1]`.
pub type Mass = Ratio<u64>;

#[derive(Debug, Error, PartialEq)]
pub enum RelError {
    #[error("reliability must be in (0, 1], got {0}/{1}")]
    OutOfRange(u64, u64),
    #[error("reliability denominator must be non-zero")]
    ZeroDenominator,
    #[error("cannot express {0} as an exact short decimal; use at most 18 fractional digits")]
    NotADecimal(f64),
}

/// A target reliability: an exact rational in `(0, 1]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rel(Ratio<u64>);

impl Rel {
    pub const fn one() -> Rel {
        Rel(Ratio::new_raw(1, 1))
    }

    pub fn new(num: u64, den: u64) -> Result<Rel, RelError> {
        if den == 0 {
            return Err(RelError::ZeroDenominator);
        }
        if num == 0 || num > den {
            return Err(RelError::OutOfRange(num, den));
        }
        Ok(Rel(Ratio::new(num, den)))
    }

    /// Parse from the shortest decimal representation of `x`.
    ///
    /// Any value that was written as a decimal with at most 15 significant
    /// digits (every reliability in practice: 0.9, 0.9999, ...) converts
    /// exactly; `0.9999` becomes 9999/10000, not the nearest binary float.
    pub fn from_f64(x: f64) -> Result<Rel, RelError> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(RelError::OutOfRange(0, 1));
        }
        let s = format!("{x}");
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s.as_str(), ""),
        };
        if frac_part.len() > 18 {
            return Err(RelError::NotADecimal(x));
        }
        let int: u64 = int_part.parse().map_err(|_| RelError::NotADecimal(x))?;
        let den = 10u64.pow(frac_part.len() as u32);
        let frac: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| RelError::NotADecimal(x))?
        };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac))
            .ok_or(RelError::NotADecimal(x))?;
        Rel::new(num, den)
    }

    pub fn as_ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Debug for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl Serialize for Rel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Rel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rel, D::Error> {
        let x = f64::deserialize(deserializer)?;
        Rel::from_f64(x).map_err(de::Error::custom)
    }
}

/// Compare `cum/total >= rel` exactly (no reduction, no overflow for any
/// u64 operands).
pub fn cum_reaches(cum: u64, total: u64, rel: Rel) -> bool {
    debug_assert!(total > 0);
    (cum as u128) * (*rel.as_ratio().denom() as u128)
        >= (*rel.as_ratio().numer() as u128) * (total as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_reliabilities_are_exact() {
        assert_eq!(Rel::from_f64(0.9999).unwrap(), Rel::new(9999, 10_000).unwrap());
        assert_eq!(Rel::from_f64(0.9).unwrap(), Rel::new(9, 10).unwrap());
        assert_eq!(Rel::from_f64(0.5).unwrap(), Rel::new(1, 2).unwrap());
        assert_eq!(Rel::from_f64(1.0).unwrap(), Rel::one());
        // 0.103-step decimals used by histogram fixtures
        assert_eq!(Rel::from_f64(0.00001).unwrap(), Rel::new(1, 100_000).unwrap());
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(Rel::from_f64(0.0).is_err());
        assert!(Rel::from_f64(1.5).is_err());
        assert!(Rel::from_f64(-0.1).is_err());
        assert!(Rel::new(3, 2).is_err());
        assert!(Rel::new(0, 5).is_err());
        assert!(Rel::new(1, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        for r in [
            Rel::new(9, 10).unwrap(),
            Rel::new(99, 100).unwrap(),
            Rel::new(999, 1000).unwrap(),
            Rel::new(9999, 10_000).unwrap(),
            Rel::one(),
        ] {
            let s = serde_json::to_string(&r).unwrap();
            let back: Rel = serde_json::from_str(&s).unwrap();
            assert_eq!(back, r, "round trip through {s}");
        }
    }

    #[test]
    fn exact_cumulative_comparison() {
        // 9/10 of 99999: boundary cases that would be fragile in f64
        let rel = Rel::new(9, 10).unwrap();
        assert!(cum_reaches(90_000, 100_000, rel));
        assert!(!cum_reaches(89_999, 100_000, rel));
        let rel = Rel::new(9999, 10_000).unwrap();
        assert!(cum_reaches(99_990, 100_000, rel));
        assert!(!cum_reaches(99_989, 100_000, rel));
    }
}
