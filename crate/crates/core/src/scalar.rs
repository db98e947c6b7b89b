//! Numeric abstraction for the continuous quantities in the simulator.
//!
//! Trust itself lives on a five-point integer scale, but credibility scores,
//! expectations, fade levels and survey averages are fractions. Everything
//! that touches those is generic over [`Scalar`], so the same engine can run
//! on `f32`, `f64` or exact rationals.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::Num;

/// Exact rational scalar.
pub type Rational = Ratio<i64>;

/// A field-like number type usable for fractions in `[0, 1]` and small averages.
pub trait Scalar: Num + Copy + PartialOrd + Debug {
    /// Builds `num / den`. `den` must be non-zero.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Greatest integer not above `self`.
    fn floor_int(self) -> i64;

    fn to_f64(self) -> f64;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn floor_int(self) -> i64 {
        self.floor() as i64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn floor_int(self) -> i64 {
        self.floor() as i64
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }

    fn floor_int(self) -> i64 {
        self.floor().to_integer()
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Renders a scalar for trace output: at most four decimals, trailing zeros
/// trimmed. The rounding is done on the `f64` image so every scalar type
/// prints the same text for the same value.
pub fn format_scalar<S: Scalar>(value: S) -> String {
    let v = value.to_f64();
    let mut s = format!("{:.4}", v);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}
