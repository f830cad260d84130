//! Censored nonnegative quantities.
//!
//! A truncated computation can prove a coefficient order exactly, prove only
//! that it exceeds the window, or (for exact polynomial identities) prove it
//! infinite. `CensoredNat` keeps those three cases apart so downstream
//! decisions never treat "unknown past N" as a number.

use core::fmt;

/// Exact rational, used for valuations and polygon slopes.
pub type Rat = num_rational::Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensoredNat {
    /// The value is provably this.
    Exact(u64),
    /// The value is provably at least this; the window ended.
    AtLeast(u64),
    /// The value is infinite (identity detected on an exact polynomial).
    Infinite,
}

impl CensoredNat {
    pub fn is_exact(&self) -> bool {
        matches!(self, CensoredNat::Exact(_))
    }

    pub fn exact_value(&self) -> Option<u64> {
        match self {
            CensoredNat::Exact(v) => Some(*v),
            _ => None,
        }
    }

    /// Best provable lower bound; `None` for `Infinite` (no finite bound).
    pub fn lower_bound(&self) -> Option<u64> {
        match self {
            CensoredNat::Exact(v) | CensoredNat::AtLeast(v) => Some(*v),
            CensoredNat::Infinite => None,
        }
    }

    /// Three-way comparison against a target: `Some(true)` when provably
    /// equal, `Some(false)` when provably different, `None` when censoring
    /// leaves it open.
    pub fn known_eq(&self, target: u64) -> Option<bool> {
        match self {
            CensoredNat::Exact(v) => Some(*v == target),
            CensoredNat::AtLeast(n) => {
                if *n > target {
                    Some(false)
                } else {
                    None
                }
            }
            CensoredNat::Infinite => Some(false),
        }
    }

    /// `Some(true)` when provably `>= target`, `Some(false)` when provably
    /// below, `None` when undecidable. AtLeast values are never provably
    /// below anything larger than their bound, hence the `None` arm.
    pub fn known_ge(&self, target: u64) -> Option<bool> {
        match self {
            CensoredNat::Exact(v) => Some(*v >= target),
            CensoredNat::AtLeast(n) => {
                if *n >= target {
                    Some(true)
                } else {
                    None
                }
            }
            CensoredNat::Infinite => Some(true),
        }
    }

    /// Subtract a constant, saturating at zero. Used for the division by
    /// the variable when passing from `g(z) - z` to `(g(z) - z)/z`.
    pub fn saturating_sub(&self, k: u64) -> CensoredNat {
        match self {
            CensoredNat::Exact(v) => CensoredNat::Exact(v.saturating_sub(k)),
            CensoredNat::AtLeast(n) => CensoredNat::AtLeast(n.saturating_sub(k)),
            CensoredNat::Infinite => CensoredNat::Infinite,
        }
    }
}

impl fmt::Display for CensoredNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CensoredNat::Exact(v) => write!(f, "{}", v),
            CensoredNat::AtLeast(n) => write!(f, ">={}", n),
            CensoredNat::Infinite => write!(f, "inf"),
        }
    }
}

/// A flag that a theorem-shaped runtime check can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriBool {
    True,
    False,
    /// No applicable data (everything censored), so nothing was checked.
    Indeterminate,
}

impl TriBool {
    pub fn from_violations(checked: usize, violations: usize) -> TriBool {
        if violations > 0 {
            TriBool::False
        } else if checked == 0 {
            TriBool::Indeterminate
        } else {
            TriBool::True
        }
    }
}

impl fmt::Display for TriBool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TriBool::True => write!(f, "true"),
            TriBool::False => write!(f, "false"),
            TriBool::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_eq_respects_censoring() {
        assert_eq!(CensoredNat::Exact(4).known_eq(4), Some(true));
        assert_eq!(CensoredNat::Exact(4).known_eq(5), Some(false));
        assert_eq!(CensoredNat::AtLeast(10).known_eq(4), Some(false));
        assert_eq!(CensoredNat::AtLeast(10).known_eq(10), None);
        assert_eq!(CensoredNat::AtLeast(10).known_eq(12), None);
        assert_eq!(CensoredNat::Infinite.known_eq(12), Some(false));
    }

    #[test]
    fn known_ge_respects_censoring() {
        assert_eq!(CensoredNat::Exact(4).known_ge(4), Some(true));
        assert_eq!(CensoredNat::Exact(4).known_ge(5), Some(false));
        assert_eq!(CensoredNat::AtLeast(10).known_ge(10), Some(true));
        assert_eq!(CensoredNat::AtLeast(10).known_ge(11), None);
        assert_eq!(CensoredNat::Infinite.known_ge(1 << 40), Some(true));
    }
}
