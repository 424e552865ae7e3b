//! Fixed-point money amounts.
//!
//! Costs live in logs, state exports and scenario files, all of which must
//! round-trip byte for byte. Floats drift, so amounts are stored as integer
//! minor units (cents) and serialized as decimal strings such as `"123.45"`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Non-negative money amount with two decimal places of precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cost(u64);

impl Cost {
    pub const ZERO: Cost = Cost(0);

    pub const fn from_minor_units(cents: u64) -> Self {
        Cost(cents)
    }

    pub const fn minor_units(self) -> u64 {
        self.0
    }

    /// Amount in whole currency units. Only for scoring math; never feeds
    /// back into stored state.
    pub fn as_units(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid cost `{0}`: expected a non-negative decimal with at most two fraction digits")]
pub struct ParseCostError(String);

impl FromStr for Cost {
    type Err = ParseCostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseCostError(s.to_string());
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if frac.len() > 2 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let units: u64 = whole.parse().map_err(|_| bad())?;
        let cents = match frac.len() {
            0 => 0,
            1 => frac.parse::<u64>().expect("digits") * 10,
            _ => frac.parse::<u64>().expect("digits"),
        };
        units
            .checked_mul(100)
            .and_then(|c| c.checked_add(cents))
            .map(Cost)
            .ok_or_else(bad)
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
