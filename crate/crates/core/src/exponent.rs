use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The exponent `p ∈ (1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p > 1.0 && p.is_finite() {
            Ok(Self::Finite(p))
        } else {
            Err(Error::Invalid(format!("p must lie in (1, inf), got {p}")))
        }
    }

    /// Tug-of-war weight `α = (p−2)/(m+p)`, `α = 1` at `p = ∞`.
    pub fn alpha(self, m: usize) -> f64 {
        match self {
            Self::Finite(p) => (p - 2.0) / (m as f64 + p),
            Self::Infinity => 1.0,
        }
    }

    /// Noise weight `β = (m+2)/(m+p)`, `β = 0` at `p = ∞`.
    pub fn beta(self, m: usize) -> f64 {
        match self {
            Self::Finite(p) => (m as f64 + 2.0) / (m as f64 + p),
            Self::Infinity => 0.0,
        }
    }

    /// Coefficient `2(m+p−2)/(m+p)` making `|X|² + c·t` a solution; 2 at `p = ∞`.
    pub fn quadratic_time_coefficient(self, m: usize) -> f64 {
        match self {
            Self::Finite(p) => 2.0 * (m as f64 + p - 2.0) / (m as f64 + p),
            Self::Infinity => 2.0,
        }
    }

    /// Value used in the binary grid header: `−1` for `∞`.
    pub fn encoded(self) -> f64 {
        match self {
            Self::Finite(p) => p,
            Self::Infinity => -1.0,
        }
    }

    pub fn is_at_least_two(self) -> bool {
        match self {
            Self::Finite(p) => p >= 2.0,
            Self::Infinity => true,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞") {
            return Ok(Self::Infinity);
        }
        let p: f64 = s
            .parse()
            .map_err(|_| Error::Invalid(format!("cannot parse exponent {s:?}")))?;
        Self::finite(p)
    }
}
