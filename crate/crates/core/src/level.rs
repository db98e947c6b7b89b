//! The five-point ordinal scale `-2..=2` shared by trust, credibility and
//! program/task attributes.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("level {0} outside the scale -2..=2")]
pub struct LevelOutOfRange(pub i64);

/// A value on the five-point scale: -2 strong distrust / very low,
/// 0 neutral / moderate, 2 strong trust / very high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TrustLevel(i8);

impl TrustLevel {
    pub const MIN: TrustLevel = TrustLevel(-2);
    pub const NEUTRAL: TrustLevel = TrustLevel(0);
    pub const MAX: TrustLevel = TrustLevel(2);

    /// Every level, lowest first.
    pub const ALL: [TrustLevel; 5] = [
        TrustLevel(-2),
        TrustLevel(-1),
        TrustLevel(0),
        TrustLevel(1),
        TrustLevel(2),
    ];

    pub fn new(value: i64) -> Result<Self, LevelOutOfRange> {
        if (-2..=2).contains(&value) {
            Ok(TrustLevel(value as i8))
        } else {
            Err(LevelOutOfRange(value))
        }
    }

    pub fn clamped(value: i64) -> Self {
        TrustLevel(value.clamp(-2, 2) as i8)
    }

    pub fn value(self) -> i8 {
        self.0
    }

    /// One step up, saturating at the top of the scale.
    pub fn raised(self) -> Self {
        Self::clamped(self.0 as i64 + 1)
    }

    /// One step down, saturating at the bottom of the scale.
    pub fn lowered(self) -> Self {
        Self::clamped(self.0 as i64 - 1)
    }

    /// Probability-like image of a level, used to turn trust and credibility
    /// levels into expectation values.
    pub fn plausibility<S: Scalar>(self) -> S {
        match self.0 {
            -2 => S::from_ratio(1, 20),
            -1 => S::from_ratio(1, 4),
            0 => S::from_ratio(1, 2),
            1 => S::from_ratio(3, 4),
            _ => S::from_ratio(19, 20),
        }
    }
}

impl fmt::Display for TrustLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for TrustLevel {
    type Err = LevelOutOfRange;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: i64 = s.trim().parse().map_err(|_| LevelOutOfRange(i64::MIN))?;
        Self::new(v)
    }
}

impl TryFrom<i64> for TrustLevel {
    type Error = LevelOutOfRange;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<TrustLevel> for i64 {
    fn from(l: TrustLevel) -> i64 {
        l.0 as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(TrustLevel::new(3).is_err());
        assert!(TrustLevel::new(-3).is_err());
        assert_eq!(TrustLevel::MAX.raised(), TrustLevel::MAX);
        assert_eq!(TrustLevel::MIN.lowered(), TrustLevel::MIN);
    }

    #[test]
    fn plausibility_table_is_monotone() {
        let vals: Vec<f64> = TrustLevel::ALL.iter().map(|l| l.plausibility()).collect();
        assert_eq!(vals, vec![0.05, 0.25, 0.5, 0.75, 0.95]);
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
    }
}
