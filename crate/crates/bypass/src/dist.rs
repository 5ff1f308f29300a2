//! Saturating distance values with an infinity sentinel.

use std::fmt;
use std::ops::Add;

/// A shortest-path distance: a non-negative 64-bit value or infinity.
///
/// Addition saturates at [`Dist::INFINITY`], and infinity compares greater
/// than every finite value, so min-plus arithmetic never wraps and
/// unreachable vertices need no special casing.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Dist(u64);

impl Dist {
    pub const ZERO: Dist = Dist(0);
    pub const INFINITY: Dist = Dist(u64::MAX);

    #[inline]
    pub fn finite(value: u64) -> Dist {
        debug_assert!(value != u64::MAX, "finite distance overflows the sentinel");
        Dist(value)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0 != u64::MAX
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0 == u64::MAX
    }

    /// Raw value; `u64::MAX` encodes infinity.
    #[inline]
    pub fn raw(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn from_raw(raw: u64) -> Dist {
        Dist(raw)
    }
}

impl Add for Dist {
    type Output = Dist;

    #[inline]
    fn add(self, rhs: Dist) -> Dist {
        if self.is_infinite() || rhs.is_infinite() {
            Dist::INFINITY
        } else {
            Dist(self.0 + rhs.0)
        }
    }
}

impl Add<u64> for Dist {
    type Output = Dist;

    #[inline]
    fn add(self, rhs: u64) -> Dist {
        self + Dist(rhs)
    }
}

impl From<u32> for Dist {
    fn from(w: u32) -> Dist {
        Dist(w as u64)
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "INF")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
