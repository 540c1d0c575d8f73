//! Checked 128-bit signed integers for exact sums.

use std::fmt;
use std::iter::Sum;
use std::str::FromStr;

use rug::Integer;

use crate::error::{CwError, Result};

/// Exact signed integer with a 128-bit range. Every arithmetic step is
/// checked; overflow surfaces as [`CwError::Overflow`] instead of wrapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct WideInt(i128);

fn overflow(op: &str, lhs: i128, rhs: i128) -> CwError {
    CwError::Overflow(format!("{lhs} {op} {rhs} exceeds the 128-bit range"))
}

impl WideInt {
    pub const ZERO: WideInt = WideInt(0);
    pub const ONE: WideInt = WideInt(1);

    pub const fn new(v: i128) -> Self {
        WideInt(v)
    }

    pub const fn get(self) -> i128 {
        self.0
    }

    pub fn checked_add(self, rhs: WideInt) -> Result<WideInt> {
        self.0
            .checked_add(rhs.0)
            .map(WideInt)
            .ok_or_else(|| overflow("+", self.0, rhs.0))
    }

    pub fn checked_sub(self, rhs: WideInt) -> Result<WideInt> {
        self.0
            .checked_sub(rhs.0)
            .map(WideInt)
            .ok_or_else(|| overflow("-", self.0, rhs.0))
    }

    pub fn checked_mul(self, rhs: WideInt) -> Result<WideInt> {
        self.0
            .checked_mul(rhs.0)
            .map(WideInt)
            .ok_or_else(|| overflow("*", self.0, rhs.0))
    }

    /// `base^exp` for a non-negative base.
    pub fn pow(base: u64, exp: u32) -> Result<WideInt> {
        (base as i128)
            .checked_pow(exp)
            .map(WideInt)
            .ok_or_else(|| CwError::Overflow(format!("{base}^{exp} exceeds the 128-bit range")))
    }

    /// Exact division; fails if `rhs` does not divide `self`.
    pub fn exact_div(self, rhs: i128) -> Result<WideInt> {
        if rhs == 0 || self.0 % rhs != 0 {
            return Err(CwError::InvariantBreach(format!(
                "{} is not divisible by {rhs}",
                self.0
            )));
        }
        Ok(WideInt(self.0 / rhs))
    }

    pub fn to_integer(self) -> Integer {
        Integer::from(self.0)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64
    }

    /// Sum with overflow detection.
    pub fn try_sum<I: IntoIterator<Item = WideInt>>(iter: I) -> Result<WideInt> {
        iter.into_iter()
            .try_fold(WideInt::ZERO, |acc, v| acc.checked_add(v))
    }
}

impl From<i64> for WideInt {
    fn from(v: i64) -> Self {
        WideInt(v as i128)
    }
}

impl From<u64> for WideInt {
    fn from(v: u64) -> Self {
        WideInt(v as i128)
    }
}

impl From<i128> for WideInt {
    fn from(v: i128) -> Self {
        WideInt(v)
    }
}

impl TryFrom<&Integer> for WideInt {
    type Error = CwError;

    fn try_from(v: &Integer) -> Result<Self> {
        v.to_i128()
            .map(WideInt)
            .ok_or_else(|| CwError::Overflow(format!("{v} exceeds the 128-bit range")))
    }
}

impl FromStr for WideInt {
    type Err = CwError;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .parse::<i128>()
            .map(WideInt)
            .map_err(|e| CwError::Parse(format!("{s:?}: {e}")))
    }
}

impl fmt::Display for WideInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// Panics on overflow, like debug-mode primitive addition; use `try_sum`
// where overflow is an expected outcome.
impl Sum for WideInt {
    fn sum<I: Iterator<Item = WideInt>>(iter: I) -> Self {
        WideInt::try_sum(iter).expect("WideInt sum overflowed")
    }
}
