//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the analysis is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Literals used by the crate are always representable.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal fits scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sign of a quantity after a tolerance band has been applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    /// Sign of `v` with `|v| <= band` mapped to [`Sign::Zero`].
    pub fn with_band<T: Scalar>(v: T, band: T) -> Self {
        if v > band {
            Sign::Positive
        } else if v < -band {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// Three-valued truth of a strict inequality evaluated with a tolerance band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Band,
}

impl Truth {
    /// Evaluates `lhs > rhs`; differences within `band` are [`Truth::Band`].
    pub fn greater<T: Scalar>(lhs: T, rhs: T, band: T) -> Self {
        let d = lhs - rhs;
        if d > band {
            Truth::True
        } else if d < -band {
            Truth::False
        } else {
            Truth::Band
        }
    }

    pub fn less<T: Scalar>(lhs: T, rhs: T, band: T) -> Self {
        Self::greater(rhs, lhs, band)
    }

    /// Conjunction: false dominates, then band.
    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::Band, _) | (_, Truth::Band) => Truth::Band,
            _ => Truth::True,
        }
    }
}
