//! Semiring instances used as value domains for data maps.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::bag::BagKey;

/// Which concrete value domain a semiring operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    TropicalNat,
    Real,
    MaxPlusReal,
    MinPlusReal,
    Boolean,
}

/// A semiring: a commutative monoid `plus` with identity `zero`, a monoid
/// `times` with identity `one`, and `times` distributing over `plus`.
///
/// Instances are values rather than types so that callers can pick one at
/// run time (the CLI does) and so a law checker can be pointed at
/// arbitrary, possibly broken, instances.
pub trait Semiring {
    type Value: Clone + PartialEq + fmt::Debug + BagKey + Send + Sync;

    fn zero(&self) -> Self::Value;
    fn one(&self) -> Self::Value;
    fn plus(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn times(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn times_commutative(&self) -> bool;
    fn kind(&self) -> ValueKind;

    /// Equality used by law checks. Exact unless overridden.
    fn approx_eq(&self, a: &Self::Value, b: &Self::Value) -> bool {
        a == b
    }
}

/// Extended natural number: a finite value or the `Infinity` sentinel.
///
/// The derived order places every finite value below `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tropical {
    Finite(u64),
    Infinity,
}

impl Tropical {
    pub const ZERO: Tropical = Tropical::Finite(0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Tropical::Infinity)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Tropical::Finite(v) => Some(v),
            Tropical::Infinity => None,
        }
    }

    /// Saturating addition: anything plus `Infinity` is `Infinity`, and
    /// overflow also lands on `Infinity`.
    pub fn saturating_add(self, other: Tropical) -> Tropical {
        match (self, other) {
            (Tropical::Finite(a), Tropical::Finite(b)) => a
                .checked_add(b)
                .map_or(Tropical::Infinity, Tropical::Finite),
            _ => Tropical::Infinity,
        }
    }

    /// Embeds into `f64`, mapping `Infinity` to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            Tropical::Finite(v) => v as f64,
            Tropical::Infinity => f64::INFINITY,
        }
    }
}

impl From<u64> for Tropical {
    fn from(v: u64) -> Self {
        Tropical::Finite(v)
    }
}

impl fmt::Display for Tropical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tropical::Finite(v) => write!(f, "{v}"),
            Tropical::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid tropical value {0:?}: expected a non-negative integer or \"inf\"")]
pub struct ParseTropicalError(pub String);

impl FromStr for Tropical {
    type Err = ParseTropicalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") {
            return Ok(Tropical::Infinity);
        }
        t.parse::<u64>()
            .map(Tropical::Finite)
            .map_err(|_| ParseTropicalError(s.to_string()))
    }
}

/// `(ℕ ∪ {∞}, min, +)`: the coefficient semiring of shortest paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MinPlus;

impl Semiring for MinPlus {
    type Value = Tropical;

    fn zero(&self) -> Tropical {
        Tropical::Infinity
    }
    fn one(&self) -> Tropical {
        Tropical::ZERO
    }
    fn plus(&self, a: &Tropical, b: &Tropical) -> Tropical {
        *a.min(b)
    }
    fn times(&self, a: &Tropical, b: &Tropical) -> Tropical {
        a.saturating_add(*b)
    }
    fn times_commutative(&self) -> bool {
        true
    }
    fn kind(&self) -> ValueKind {
        ValueKind::TropicalNat
    }
}

/// Relative tolerance for float comparisons in law checks.
pub const REAL_REL_TOL: f64 = 1e-9;
/// Absolute tolerance used near zero.
pub const REAL_ABS_TOL: f64 = 1e-12;

/// Float comparison with relative tolerance `1e-9` and absolute `1e-12`.
/// Infinities compare equal only to themselves; NaN never matches.
pub fn real_approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    let diff = (a - b).abs();
    diff <= REAL_ABS_TOL || diff <= REAL_REL_TOL * a.abs().max(b.abs())
}

/// `(ℝ, +, ×)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Real;

impl Semiring for Real {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn plus(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn times_commutative(&self) -> bool {
        true
    }
    fn kind(&self) -> ValueKind {
        ValueKind::Real
    }
    fn approx_eq(&self, a: &f64, b: &f64) -> bool {
        real_approx_eq(*a, *b)
    }
}

/// `(ℝ ∪ {−∞}, max, +)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaxPlus;

impl Semiring for MaxPlus {
    type Value = f64;

    fn zero(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn one(&self) -> f64 {
        0.0
    }
    fn plus(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        // -inf annihilates; never produce NaN from -inf + inf.
        if *a == f64::NEG_INFINITY || *b == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            a + b
        }
    }
    fn times_commutative(&self) -> bool {
        true
    }
    fn kind(&self) -> ValueKind {
        ValueKind::MaxPlusReal
    }
    fn approx_eq(&self, a: &f64, b: &f64) -> bool {
        real_approx_eq(*a, *b)
    }
}

/// `(ℝ ∪ {+∞}, min, +)`: the tropical semiring over floats, used when
/// shortest-path values ride inside real-valued feature channels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MinPlusReal;

impl Semiring for MinPlusReal {
    type Value = f64;

    fn zero(&self) -> f64 {
        f64::INFINITY
    }
    fn one(&self) -> f64 {
        0.0
    }
    fn plus(&self, a: &f64, b: &f64) -> f64 {
        a.min(*b)
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        if *a == f64::INFINITY || *b == f64::INFINITY {
            f64::INFINITY
        } else {
            a + b
        }
    }
    fn times_commutative(&self) -> bool {
        true
    }
    fn kind(&self) -> ValueKind {
        ValueKind::MinPlusReal
    }
    fn approx_eq(&self, a: &f64, b: &f64) -> bool {
        real_approx_eq(*a, *b)
    }
}

/// `({false, true}, or, and)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Boolean;

impl Semiring for Boolean {
    type Value = bool;

    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn plus(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn times(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn times_commutative(&self) -> bool {
        true
    }
    fn kind(&self) -> ValueKind {
        ValueKind::Boolean
    }
}

/// A deliberately broken instance: `plus` is subtraction. It is neither
/// associative nor commutative, and exists so the law checker can be shown
/// to reject something.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubtractionPlus;

impl Semiring for SubtractionPlus {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn plus(&self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn times_commutative(&self) -> bool {
        true
    }
    fn kind(&self) -> ValueKind {
        ValueKind::Real
    }
    fn approx_eq(&self, a: &f64, b: &f64) -> bool {
        real_approx_eq(*a, *b)
    }
}

/// Total order on floats used to canonicalize bags.
pub(crate) fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.total_cmp(b)
}
