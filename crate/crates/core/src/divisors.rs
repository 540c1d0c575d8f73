//! Per-`n` arithmetic functions: `tau`, `sigma_alpha`, the square indicator,
//! the restricted sums `sigma_{a,alpha}` and the exact integer `a`-th root.
//!
//! The restriction `d <= n^(1/a)` is always tested as `d^a <= n` in integer
//! arithmetic.

use std::fmt;

use crate::error::{invalid, CwError, Result};
use crate::numeric::{CompensatedSum, Exponent};
use crate::wide::WideInt;

/// Restriction root `a >= 2` and weight exponent `alpha >= 0`.
///
/// `Exponent::Int` selects exact integer mode; `Exponent::Real` selects the
/// compensated floating-point path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisorSpec {
    a: u32,
    alpha: Exponent,
}

impl DivisorSpec {
    pub fn new(a: u32, alpha: Exponent) -> Result<Self> {
        if a < 2 {
            return Err(invalid(format!("restriction root a = {a} must be >= 2")));
        }
        if !alpha.is_finite() || alpha.is_negative() {
            return Err(invalid(format!(
                "weight exponent alpha = {alpha} must be >= 0"
            )));
        }
        Ok(DivisorSpec { a, alpha })
    }

    /// Exact-mode shorthand.
    pub fn exact(a: u32, alpha: u32) -> Result<Self> {
        Self::new(a, Exponent::Int(alpha as i64))
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn alpha(&self) -> Exponent {
        self.alpha
    }

    /// The integer exponent when in exact mode.
    pub fn exact_alpha(&self) -> Option<u32> {
        match self.alpha {
            Exponent::Int(v) => u32::try_from(v).ok(),
            Exponent::Real(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact_alpha().is_some()
    }
}

impl fmt::Display for DivisorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} alpha={}", self.a, self.alpha)
    }
}

/// A sum that is exact in integer mode and a compensated float otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SumValue {
    Exact(WideInt),
    Real(f64),
}

impl SumValue {
    pub fn to_f64(self) -> f64 {
        match self {
            SumValue::Exact(v) => v.to_f64(),
            SumValue::Real(v) => v,
        }
    }

    pub fn exact(self) -> Option<WideInt> {
        match self {
            SumValue::Exact(v) => Some(v),
            SumValue::Real(_) => None,
        }
    }
}

impl fmt::Display for SumValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SumValue::Exact(v) => write!(f, "{v}"),
            SumValue::Real(v) => write!(f, "{v:e}"),
        }
    }
}

/// `base^exp` as `u128`, `None` on overflow.
pub(crate) fn checked_pow_u128(base: u64, exp: u32) -> Option<u128> {
    (base as u128).checked_pow(exp)
}

/// `base^exp <= bound`, exactly.
pub(crate) fn pow_le(base: u64, exp: u32, bound: u64) -> bool {
    checked_pow_u128(base, exp).is_some_and(|p| p <= bound as u128)
}

/// Largest `D` with `D^a <= n`.
pub fn integer_root(n: u64, a: u32) -> Result<u64> {
    if a < 2 {
        return Err(invalid(format!("integer_root needs a >= 2, got {a}")));
    }
    if n < 2 {
        return Ok(n);
    }
    if a >= 64 {
        // 2^64 > n
        return Ok(1);
    }
    let mut root = (n as f64).powf(1.0 / a as f64).round() as u64;
    while root > 0 && !pow_le(root, a, n) {
        root -= 1;
    }
    while pow_le(root + 1, a, n) {
        root += 1;
    }
    Ok(root)
}

/// `floor(sqrt(n))`.
pub fn isqrt(n: u64) -> u64 {
    integer_root(n, 2).expect("a = 2 is valid")
}

/// Divisor pairs `(d, n / d)` with `d <= sqrt(n)`, by trial division.
fn divisor_pairs(n: u64) -> impl Iterator<Item = (u64, u64)> {
    (1..=isqrt(n))
        .filter(move |d| n.is_multiple_of(*d))
        .map(move |d| (d, n / d))
}

fn require_positive(n: u64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    Ok(())
}

fn exact_power(d: u64, alpha: u32) -> Result<WideInt> {
    WideInt::pow(d, alpha)
}

/// Weighted sum over the divisors accepted by `keep`.
fn weighted_divisor_sum(n: u64, alpha: Exponent, keep: impl Fn(u64) -> bool) -> Result<SumValue> {
    require_positive(n)?;
    let divisors = divisor_pairs(n).flat_map(|(d, e)| {
        let cofactor = (e != d).then_some(e);
        std::iter::once(d).chain(cofactor)
    });
    match alpha {
        Exponent::Int(k) => {
            let k = u32::try_from(k)
                .map_err(|_| invalid(format!("exact mode needs alpha >= 0, got {k}")))?;
            let mut total = WideInt::ZERO;
            for d in divisors.filter(|&d| keep(d)) {
                total = total.checked_add(exact_power(d, k)?)?;
            }
            Ok(SumValue::Exact(total))
        }
        Exponent::Real(r) => {
            let sum: CompensatedSum = divisors
                .filter(|&d| keep(d))
                .map(|d| (d as f64).powf(r))
                .collect();
            Ok(SumValue::Real(sum.value()))
        }
    }
}

/// `sigma_{a,alpha}(n)`: the sum of `d^alpha` over divisors `d | n` with `d^a <= n`.
pub fn divisor_sum_restricted(n: u64, spec: &DivisorSpec) -> Result<SumValue> {
    let a = spec.a();
    weighted_divisor_sum(n, spec.alpha(), |d| pow_le(d, a, n))
}

/// Number of divisors.
pub fn tau(n: u64) -> Result<WideInt> {
    require_positive(n)?;
    let count: u64 = divisor_pairs(n)
        .map(|(d, e)| if d == e { 1 } else { 2 })
        .sum();
    Ok(WideInt::from(count))
}

/// `sum_{d | n} d^alpha`.
pub fn sigma_alpha(n: u64, alpha: Exponent) -> Result<SumValue> {
    if alpha.is_negative() {
        return Err(invalid("sigma_alpha needs alpha >= 0"));
    }
    weighted_divisor_sum(n, alpha, |_| true)
}

/// 1 when `n` is a perfect square, else 0.
pub fn is_square(n: u64) -> u8 {
    let r = isqrt(n);
    u8::from(r * r == n)
}

/// `(tau(n) + 1_square(n)) / 2`, the number of divisors `d <= sqrt(n)`.
pub fn tau_tilde_via_identity(n: u64) -> Result<WideInt> {
    let t = tau(n)?;
    let sq = WideInt::from(is_square(n) as u64);
    t.checked_add(sq)?.exact_div(2).map_err(|_| {
        CwError::InvariantBreach(format!(
            "tau({n}) = {t} and 1_square({n}) = {sq} have different parity"
        ))
    })
}
