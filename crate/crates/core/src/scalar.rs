//! Max-plus scalars: exact rationals extended by the bottom element ε = −∞.

use std::fmt;
use std::str::FromStr;

use crate::rational::{ParseRationalError, Rational};

/// An element of the max-plus semiring.
///
/// `Eps` is declared first so the derived order puts it below every finite
/// value, which makes `⊕` a plain `max`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Tropical {
    #[default]
    Eps,
    Fin(Rational),
}

impl Tropical {
    /// The multiplicative unit `e = 0`.
    pub fn unit() -> Self {
        Tropical::Fin(Rational::zero())
    }

    pub fn is_eps(&self) -> bool {
        matches!(self, Tropical::Eps)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Tropical::Eps => None,
            Tropical::Fin(v) => Some(v),
        }
    }

    pub fn into_finite(self) -> Option<Rational> {
        match self {
            Tropical::Eps => None,
            Tropical::Fin(v) => Some(v),
        }
    }

    /// `a ⊕ b = max(a, b)`
    pub fn oplus(&self, other: &Tropical) -> Tropical {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// `a ⊗ b = a + b`, with ε absorbing.
    pub fn otimes(&self, other: &Tropical) -> Tropical {
        match (self, other) {
            (Tropical::Fin(a), Tropical::Fin(b)) => Tropical::Fin(a + b),
            _ => Tropical::Eps,
        }
    }
}

impl From<Rational> for Tropical {
    fn from(v: Rational) -> Self {
        Tropical::Fin(v)
    }
}

impl From<Option<Rational>> for Tropical {
    fn from(v: Option<Rational>) -> Self {
        v.map_or(Tropical::Eps, Tropical::Fin)
    }
}

impl From<i64> for Tropical {
    fn from(v: i64) -> Self {
        Tropical::Fin(Rational::from_integer(v))
    }
}

impl fmt::Display for Tropical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tropical::Eps => f.write_str("."),
            Tropical::Fin(v) => fmt::Display::fmt(v, f),
        }
    }
}

impl fmt::Debug for Tropical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tropical::Eps => f.write_str("ε"),
            Tropical::Fin(v) => fmt::Display::fmt(v, f),
        }
    }
}

/// Accepts `p`, `p/q`, and ε spelled `.`, `-inf` or `ε`.
impl FromStr for Tropical {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "." | "-inf" | "ε" => Ok(Tropical::Eps),
            _ => s.parse().map(Tropical::Fin),
        }
    }
}
