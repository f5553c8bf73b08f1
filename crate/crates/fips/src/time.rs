//! Integer-nanosecond time with an explicit infinity sentinel.
//!
//! All schedule computation is exact integer arithmetic; the only place
//! sub-nanosecond quantities could appear (serialization times) rounds up
//! to whole nanoseconds at the source.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Sub, SubAssign};

/// A point in time or a duration, in whole nanoseconds.
///
/// `TimeNs::INFINITY` is a distinct sentinel meaning "never" (a dropped
/// frame's transmission time, an unbounded delay). It is absorbing under
/// addition and subtraction of finite values; `INFINITY - INFINITY` panics.
/// In JSON it is rendered as `null`, never as a large finite number.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimeNs(i64);

impl TimeNs {
    pub const ZERO: TimeNs = TimeNs(0);
    pub const INFINITY: TimeNs = TimeNs(i64::MAX);

    pub const fn from_ns(ns: i64) -> TimeNs {
        assert!(ns != i64::MAX, "i64::MAX is reserved for TimeNs::INFINITY");
        TimeNs(ns)
    }

    /// Whole milliseconds, for hand-written test fixtures.
    pub const fn from_ms(ms: i64) -> TimeNs {
        TimeNs(ms * 1_000_000)
    }

    pub const fn from_us(us: i64) -> TimeNs {
        TimeNs(us * 1_000)
    }

    pub const fn is_finite(self) -> bool {
        self.0 != i64::MAX
    }

    /// The finite value in nanoseconds. Panics on `INFINITY`.
    pub fn ns(self) -> i64 {
        assert!(self.is_finite(), "TimeNs::INFINITY has no finite value");
        self.0
    }

    /// Saturating multiply by a non-negative integer count.
    pub fn mul(self, k: i64) -> TimeNs {
        if !self.is_finite() {
            return TimeNs::INFINITY;
        }
        TimeNs(self.0.checked_mul(k).expect("TimeNs multiply overflow"))
    }

    pub fn min(self, other: TimeNs) -> TimeNs {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: TimeNs) -> TimeNs {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Add for TimeNs {
    type Output = TimeNs;
    fn add(self, rhs: TimeNs) -> TimeNs {
        if !self.is_finite() || !rhs.is_finite() {
            return TimeNs::INFINITY;
        }
        TimeNs(self.0.checked_add(rhs.0).expect("TimeNs add overflow"))
    }
}

impl AddAssign for TimeNs {
    fn add_assign(&mut self, rhs: TimeNs) {
        *self = *self + rhs;
    }
}

impl Sub for TimeNs {
    type Output = TimeNs;
    fn sub(self, rhs: TimeNs) -> TimeNs {
        assert!(
            rhs.is_finite(),
            "cannot subtract TimeNs::INFINITY from a time"
        );
        if !self.is_finite() {
            return TimeNs::INFINITY;
        }
        TimeNs(self.0.checked_sub(rhs.0).expect("TimeNs sub overflow"))
    }
}

impl SubAssign for TimeNs {
    fn sub_assign(&mut self, rhs: TimeNs) {
        *self = *self - rhs;
    }
}

impl fmt::Debug for TimeNs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}ns", self.0)
        } else {
            write!(f, "∞")
        }
    }
}

impl fmt::Display for TimeNs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_finite() {
            return write!(f, "∞");
        }
        let ns = self.0;
        if ns != 0 && ns % 1_000_000 == 0 {
            write!(f, "{}ms", ns / 1_000_000)
        } else if ns != 0 && ns % 1_000 == 0 {
            write!(f, "{}us", ns / 1_000)
        } else {
            write!(f, "{}ns", ns)
        }
    }
}

impl Serialize for TimeNs {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_finite() {
            serializer.serialize_i64(self.0)
        } else {
            serializer.serialize_none()
        }
    }
}

impl<'de> Deserialize<'de> for TimeNs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<TimeNs, D::Error> {
        let v: Option<i64> = Option::deserialize(deserializer)?;
        match v {
            None => Ok(TimeNs::INFINITY),
            Some(ns) if ns == i64::MAX => Err(de::Error::custom(
                "times must be finite integers or null (infinity)",
            )),
            Some(ns) => Ok(TimeNs(ns)),
        }
    }
}

/// A closed interval `[lo, hi]` of finite times, `lo <= hi`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: TimeNs,
    pub hi: TimeNs,
}

impl Interval {
    pub fn new(lo: TimeNs, hi: TimeNs) -> Interval {
        assert!(lo.is_finite() && hi.is_finite(), "interval bounds must be finite");
        assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// The zero-width interval `[t, t]` of a deterministic delay.
    pub fn degenerate(t: TimeNs) -> Interval {
        Interval::new(t, t)
    }

    pub fn contains(&self, t: TimeNs) -> bool {
        t.is_finite() && self.lo <= t && t <= self.hi
    }

    pub fn width(&self) -> TimeNs {
        self.hi - self.lo
    }

    /// Shift both ends by a finite offset.
    pub fn shift(&self, by: TimeNs) -> Interval {
        Interval::new(self.lo + by, self.hi + by)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_is_absorbing() {
        let inf = TimeNs::INFINITY;
        let t = TimeNs::from_ns(5);
        assert_eq!(inf + t, inf);
        assert_eq!(t + inf, inf);
        assert_eq!(inf - t, inf);
        assert!(!inf.is_finite());
        assert!(inf > TimeNs::from_ns(i64::MAX - 1));
    }

    #[test]
    #[should_panic]
    fn infinity_has_no_ns_value() {
        let _ = TimeNs::INFINITY.ns();
    }

    #[test]
    fn json_round_trip_uses_null_for_infinity() {
        let inf = serde_json::to_string(&TimeNs::INFINITY).unwrap();
        assert_eq!(inf, "null");
        let t = serde_json::to_string(&TimeNs::from_ns(8050)).unwrap();
        assert_eq!(t, "8050");
        let back: TimeNs = serde_json::from_str("null").unwrap();
        assert_eq!(back, TimeNs::INFINITY);
        let back: TimeNs = serde_json::from_str("8050").unwrap();
        assert_eq!(back, TimeNs::from_ns(8050));
    }

    #[test]
    fn interval_contains_closed_bounds() {
        let iv = Interval::new(TimeNs::from_ns(10), TimeNs::from_ns(20));
        assert!(iv.contains(TimeNs::from_ns(10)));
        assert!(iv.contains(TimeNs::from_ns(20)));
        assert!(!iv.contains(TimeNs::from_ns(21)));
        assert!(!iv.contains(TimeNs::INFINITY));
        assert_eq!(iv.width(), TimeNs::from_ns(10));
    }
}
