//! Investment thresholds on the state axis, which may be infinite.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A positive state level, or `Infinite` when the corresponding switch is
/// never worthwhile.
///
/// Serializes as a JSON number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Finite(f64),
    Infinite,
}

impl Threshold {
    /// Wraps `v`, mapping `+inf` to [`Threshold::Infinite`].
    pub fn new(v: f64) -> Self {
        if v == f64::INFINITY {
            Threshold::Infinite
        } else {
            Threshold::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Threshold::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Threshold::Finite(v) => Some(v),
            Threshold::Infinite => None,
        }
    }

    /// The level as a float, `f64::INFINITY` for `Infinite`.
    pub fn value(self) -> f64 {
        match self {
            Threshold::Finite(v) => v,
            Threshold::Infinite => f64::INFINITY,
        }
    }

    pub fn min(self, other: Threshold) -> Threshold {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Threshold) -> Threshold {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl From<f64> for Threshold {
    fn from(v: f64) -> Self {
        Threshold::new(v)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(v) => write!(f, "{v}"),
            Threshold::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threshold::Finite(v) => s.serialize_f64(*v),
            Threshold::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Threshold;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Threshold, E> {
                Ok(Threshold::new(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Threshold, E> {
                Ok(Threshold::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Threshold, E> {
                Ok(Threshold::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Threshold, E> {
                if v == "inf" {
                    Ok(Threshold::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Serde helper for plain `f64` fields that may hold `+inf` (JSON has no
/// infinity literal).
pub mod serde_inf {
    use super::Threshold;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_str("nan")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            Threshold::new(*v).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Threshold::deserialize(d).map(Threshold::value)
    }
}
