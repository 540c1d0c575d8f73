//! `sum_{n <= x} sigma_{a,alpha}(n)` by two independent routes.
//!
//! The brute-force route enumerates every pair `n = d k <= x` with
//! `k >= d^(a-1)` (equivalently `d^a <= n`). The fast route swaps the order
//! of summation:
//!
//! ```text
//! sum_{d <= x^(1/a)} d^alpha (floor(x/d) - d^(a-1) + 1)
//!   = x G_{a,alpha-1,0} - G_{a,alpha+a-1,0} + G_{a,alpha,0}/2 - G_{a,alpha,1}
//! ```
//!
//! using `floor(t) = t - 1/2 - psi(t)`.

use std::fmt;

use rayon::prelude::*;
use rug::Rational;

use crate::cw_sums::{g_sum, g_sum_f64, GSumSpec, GValue, Point, Root};
use crate::divisors::{integer_root, DivisorSpec, SumValue};
use crate::error::{CwError, Result};
use crate::numeric::{CompensatedSum, Exponent};
use crate::wide::WideInt;

/// Largest `x` the brute-force route accepts.
pub const BRUTE_FORCE_LIMIT: u64 = 100_000_000;

/// Above this cutoff the components with harmonic-type denominators
/// (`alpha = 0`) are reported in floating point instead of exactly.
pub const EXACT_COMPONENT_LIMIT: u64 = 1 << 15;

const SEGMENT: u64 = 1 << 16;
const D_CHUNK: u64 = 1 << 13;

/// One component of the four-term decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Exact(Rational),
    Approx(f64),
}

impl Term {
    pub fn to_f64(&self) -> f64 {
        match self {
            Term::Exact(q) => q.to_f64(),
            Term::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Term::Exact(q) => Some(q),
            Term::Approx(_) => None,
        }
    }

    fn from_g(v: GValue, scale: &Rational) -> Term {
        match v {
            GValue::Exact(q) => Term::Exact(q * scale),
            GValue::Float(f) => Term::Approx(f * scale.to_f64()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Exact(q) => write!(f, "{q}"),
            Term::Approx(v) => write!(f, "{v:e}"),
        }
    }
}

/// The four components and the floor-form total.
#[derive(Debug, Clone, PartialEq)]
pub struct SummatoryBreakdown {
    pub x: u64,
    pub spec: DivisorSpec,
    /// `x G_{a,alpha-1,0}(x)`
    pub term_main: Term,
    /// `-G_{a,alpha+a-1,0}(x)`
    pub term_power: Term,
    /// `G_{a,alpha,0}(x) / 2`
    pub term_half: Term,
    /// `-G_{a,alpha,1}(x)`
    pub term_psi: Term,
    /// The floor-form sum.
    pub total: SumValue,
}

impl SummatoryBreakdown {
    pub fn terms(&self) -> [&Term; 4] {
        [
            &self.term_main,
            &self.term_power,
            &self.term_half,
            &self.term_psi,
        ]
    }

    /// Sum of the four components; exact when every component is.
    pub fn component_sum(&self) -> Term {
        let exact: Option<Vec<&Rational>> = self.terms().iter().map(|t| t.exact()).collect();
        match exact {
            Some(qs) => Term::Exact(qs.into_iter().sum()),
            None => {
                let s: CompensatedSum = self.terms().iter().map(|t| t.to_f64()).collect();
                Term::Approx(s.value())
            }
        }
    }

    /// Checks that the components reassemble the floor-form total: exactly
    /// when possible, else to `1e-9` relative.
    pub fn check_interchange(&self) -> Result<()> {
        let ok = match (self.component_sum(), self.total) {
            (Term::Exact(q), SumValue::Exact(t)) => q == t.to_integer(),
            (sum, total) => {
                let (s, t) = (sum.to_f64(), total.to_f64());
                let scale = self
                    .terms()
                    .iter()
                    .map(|c| c.to_f64().abs())
                    .fold(t.abs().max(1.0), f64::max);
                (s - t).abs() <= 1e-9 * scale
            }
        };
        if ok {
            Ok(())
        } else {
            Err(CwError::InvariantBreach(format!(
                "components sum to {} but the floor form gives {} (x = {}, {})",
                self.component_sum(),
                self.total,
                self.x,
                self.spec
            )))
        }
    }
}

/// Brute-force `sum_{n <= x} sigma_{a,alpha}(n)` for `x <= BRUTE_FORCE_LIMIT`.
pub fn summatory_bruteforce(x: u64, spec: &DivisorSpec) -> Result<SumValue> {
    Ok(summatory_bruteforce_many(&[x], spec)?.remove(0))
}

/// Brute-force values at several points, in input order, from one pass of
/// pair enumeration up to the largest point.
pub fn summatory_bruteforce_many(xs: &[u64], spec: &DivisorSpec) -> Result<Vec<SumValue>> {
    let max_x = xs.iter().copied().max().unwrap_or(0);
    if max_x > BRUTE_FORCE_LIMIT {
        return Err(CwError::Refused(format!(
            "brute force is limited to x <= {BRUTE_FORCE_LIMIT} (got {max_x}); use the fast mode"
        )));
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by_key(|&i| xs[i]);
    let mut out = vec![zero_value(spec); xs.len()];
    let mut next = order.iter().peekable();
    // x = 0 is an empty sum
    while next.next_if(|&&i| xs[i] == 0).is_some() {}

    let a = spec.a();
    let weights = Weights::new(spec, integer_root(max_x, a)?)?;
    let mut running = Running::new(spec);
    let mut lo = 1u64;
    while lo <= max_x && next.peek().is_some() {
        let hi = (lo + SEGMENT - 1).min(max_x);
        let mut seg = weights.segment(lo, hi)?;
        let mut d = 1u64;
        while let Some(k_min) = d.checked_pow(a - 1).filter(|&p| p.saturating_mul(d) <= hi) {
            let first = k_min.max(lo.div_ceil(d));
            let mut n = first * d;
            while n <= hi {
                seg.add(n - lo, d)?;
                n += d;
            }
            d += 1;
        }
        for offset in 0..=(hi - lo) {
            running.push(&seg, offset)?;
            let n = lo + offset;
            while let Some(i) = next.next_if(|&&i| xs[i] == n) {
                out[*i] = running.value();
            }
        }
        lo = hi + 1;
    }
    Ok(out)
}

fn zero_value(spec: &DivisorSpec) -> SumValue {
    if spec.is_exact() {
        SumValue::Exact(WideInt::ZERO)
    } else {
        SumValue::Real(0.0)
    }
}

enum Weights {
    Exact(Vec<i128>),
    Real(Vec<f64>),
}

impl Weights {
    fn new(spec: &DivisorSpec, d_max: u64) -> Result<Self> {
        match spec.exact_alpha() {
            Some(k) => Ok(Weights::Exact(
                (0..=d_max)
                    .map(|d| WideInt::pow(d, k).map(WideInt::get))
                    .collect::<Result<_>>()?,
            )),
            None => {
                let r = spec.alpha().to_f64();
                Ok(Weights::Real(
                    (0..=d_max).map(|d| (d as f64).powf(r)).collect(),
                ))
            }
        }
    }

    fn segment(&self, lo: u64, hi: u64) -> Result<Segment<'_>> {
        let len = (hi - lo + 1) as usize;
        Ok(match self {
            Weights::Exact(w) => Segment::Exact(w, vec![0; len]),
            Weights::Real(w) => Segment::Real(w, vec![0.0; len]),
        })
    }
}

enum Segment<'w> {
    Exact(&'w [i128], Vec<i128>),
    Real(&'w [f64], Vec<f64>),
}

impl Segment<'_> {
    fn add(&mut self, offset: u64, d: u64) -> Result<()> {
        match self {
            Segment::Exact(w, vals) => {
                let slot = &mut vals[offset as usize];
                *slot = WideInt::new(*slot)
                    .checked_add(WideInt::new(w[d as usize]))?
                    .get();
            }
            Segment::Real(w, vals) => vals[offset as usize] += w[d as usize],
        }
        Ok(())
    }
}

enum Running {
    Exact(WideInt),
    Real(CompensatedSum),
}

impl Running {
    fn new(spec: &DivisorSpec) -> Self {
        if spec.is_exact() {
            Running::Exact(WideInt::ZERO)
        } else {
            Running::Real(CompensatedSum::new())
        }
    }

    fn push(&mut self, seg: &Segment<'_>, offset: u64) -> Result<()> {
        match (self, seg) {
            (Running::Exact(acc), Segment::Exact(_, vals)) => {
                *acc = acc.checked_add(WideInt::new(vals[offset as usize]))?;
            }
            (Running::Real(acc), Segment::Real(_, vals)) => acc.add(vals[offset as usize]),
            _ => unreachable!("segment and accumulator modes agree"),
        }
        Ok(())
    }

    fn value(&self) -> SumValue {
        match self {
            Running::Exact(v) => SumValue::Exact(*v),
            Running::Real(s) => SumValue::Real(s.value()),
        }
    }
}

/// Floor form `sum_{d <= x^(1/a)} d^alpha (floor(x/d) - d^(a-1) + 1)` only.
pub fn summatory_total(x: u64, spec: &DivisorSpec) -> Result<SumValue> {
    let a = spec.a();
    let d_max = integer_root(x, a)?;
    if d_max == 0 {
        return Ok(zero_value(spec));
    }
    let chunks: Vec<(u64, u64)> = (0..=(d_max - 1) / D_CHUNK)
        .map(|i| (1 + i * D_CHUNK, ((i + 1) * D_CHUNK).min(d_max)))
        .collect();
    match spec.exact_alpha() {
        Some(k) => {
            let parts: Vec<WideInt> = chunks
                .into_par_iter()
                .map(|(s, e)| {
                    let mut acc = WideInt::ZERO;
                    for d in s..=e {
                        // d^a <= x, so floor(x/d) >= d^(a-1)
                        let count = (x / d - d.pow(a - 1) + 1) as i128;
                        acc =
                            acc.checked_add(WideInt::pow(d, k)?.checked_mul(WideInt::new(count))?)?;
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?;
            Ok(SumValue::Exact(WideInt::try_sum(parts)?))
        }
        None => {
            let r = spec.alpha().to_f64();
            let parts: Vec<CompensatedSum> = chunks
                .into_par_iter()
                .map(|(s, e)| {
                    (s..=e)
                        .map(|d| (d as f64).powf(r) * (x / d - d.pow(a - 1) + 1) as f64)
                        .collect()
                })
                .collect();
            let mut total = CompensatedSum::new();
            for p in &parts {
                total.merge(p);
            }
            Ok(SumValue::Real(total.value()))
        }
    }
}

/// Floor-form total plus the four-component decomposition.
pub fn summatory_fast(x: u64, spec: &DivisorSpec) -> Result<SummatoryBreakdown> {
    let total = summatory_total(x, spec)?;
    let a = spec.a();
    let d_max = integer_root(x, a)?;
    let alpha = spec.alpha();
    let shifted = |delta: i64| -> Exponent {
        match alpha {
            Exponent::Int(k) => Exponent::Int(k + delta),
            Exponent::Real(r) => Exponent::Real(r + delta as f64),
        }
    };
    let exact_components = matches!(alpha, Exponent::Int(k) if k >= 1)
        || (spec.is_exact() && d_max <= EXACT_COMPONENT_LIMIT);
    let g = |alpha: Exponent, j: u32| -> Result<GValue> {
        let s = GSumSpec::new(Root::Int(a), alpha, j, Point::Int(x))?;
        if exact_components {
            g_sum(&s)
        } else {
            g_sum_f64(&s).map(GValue::Float)
        }
    };
    let one = Rational::from(1);
    Ok(SummatoryBreakdown {
        x,
        spec: *spec,
        term_main: Term::from_g(g(shifted(-1), 0)?, &Rational::from(x)),
        term_power: Term::from_g(g(shifted(a as i64 - 1), 0)?, &-one.clone()),
        term_half: Term::from_g(g(alpha, 0)?, &Rational::from((1, 2))),
        term_psi: Term::from_g(g(alpha, 1)?, &-one),
        total,
    })
}
