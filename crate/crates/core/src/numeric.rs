//! Shared numeric plumbing: weight exponents, compensated summation and
//! the working precision for high-precision reals.

use std::fmt;
use std::str::FromStr;

use rug::{Float, Rational};

use crate::error::{CwError, Result};

/// Working precision (bits) for high-precision reals: 128 bits is ~38
/// significant decimal digits.
pub const PREC: u32 = 128;

/// Significant digits emitted when printing high-precision reals.
pub const OUTPUT_DIGITS: usize = 30;

pub fn hp<T>(v: T) -> Float
where
    Float: rug::Assign<T>,
{
    let mut f = Float::new(PREC);
    rug::Assign::assign(&mut f, v);
    f
}

/// Decimal string with [`OUTPUT_DIGITS`] significant digits.
pub fn format_hp(v: &Float) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    v.to_string_radix(10, Some(OUTPUT_DIGITS))
}

/// An exponent that is either an exact integer or a real number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Int(i64),
    Real(f64),
}

impl Exponent {
    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Int(v) => v as f64,
            Exponent::Real(v) => v,
        }
    }

    /// The exact rational value (every finite `f64` is a dyadic rational).
    pub fn to_rational(self) -> Rational {
        match self {
            Exponent::Int(v) => Rational::from(v),
            Exponent::Real(v) => Rational::from_f64(v).expect("finite exponent"),
        }
    }

    /// `Some(n)` when the value is integral, whichever variant holds it.
    pub fn as_int(self) -> Option<i64> {
        match self {
            Exponent::Int(v) => Some(v),
            Exponent::Real(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => Some(v as i64),
            Exponent::Real(_) => None,
        }
    }

    pub fn is_negative(self) -> bool {
        self.to_f64() < 0.0
    }

    pub fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Int(v) => write!(f, "{v}"),
            Exponent::Real(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Exponent {
    type Err = CwError;

    /// `"2"` parses as `Int(2)`, `"0.5"` or `"2.0"` as `Real`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<i64>() {
            return Ok(Exponent::Int(v));
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Exponent::Real(v)),
            _ => Err(CwError::Parse(format!("not a finite exponent: {s:?}"))),
        }
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}
