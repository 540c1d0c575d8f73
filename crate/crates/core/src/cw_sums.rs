//! Chowla–Walum sums `G_{a,alpha,j}(x) = sum_{d <= x^(1/a)} d^alpha B_j({x/d})`,
//! their dyadic blocks, and the Bourgain–Watt block sum of `psi`.
//!
//! With integer `x` and integer `alpha` every term is an exact rational and
//! the sum is accumulated exactly, one common denominator per dyadic block.
//! Otherwise terms are doubles summed with compensation over fixed-size
//! chunks, merged in chunk order so the result does not depend on the
//! thread count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::bernoulli::{psi, psi_exact, BernoulliPoly, MAX_DEGREE};
use crate::divisors::integer_root;
use crate::error::{invalid, CwError, Result};
use crate::numeric::{hp, CompensatedSum, Exponent, PREC};

/// Terms per chunk in the floating-point path.
const CHUNK: u64 = 1 << 12;

/// Restriction root `a > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Root {
    Int(u32),
    Real(f64),
}

impl Root {
    pub fn to_f64(self) -> f64 {
        match self {
            Root::Int(a) => a as f64,
            Root::Real(a) => a,
        }
    }

    fn normalized(self) -> Root {
        match self {
            Root::Real(a) if a.fract() == 0.0 && a < u32::MAX as f64 => Root::Int(a as u32),
            other => other,
        }
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Root::Int(a) => write!(f, "{a}"),
            Root::Real(a) => write!(f, "{a}"),
        }
    }
}

/// Evaluation point: an integer (exact mode possible) or a real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Int(u64),
    Real(f64),
}

impl Point {
    pub fn to_f64(self) -> f64 {
        match self {
            Point::Int(x) => x as f64,
            Point::Real(x) => x,
        }
    }

    fn floor(self) -> u64 {
        match self {
            Point::Int(x) => x,
            Point::Real(x) => x.floor() as u64,
        }
    }

    fn to_rational(self) -> Rational {
        match self {
            Point::Int(x) => Rational::from(x),
            Point::Real(x) => Rational::from_f64(x).expect("validated finite"),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Int(x) => write!(f, "{x}"),
            Point::Real(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Point {
    type Err = CwError;

    /// Digits only give `Int`; anything else parsed as a real.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Point::Int(v));
        }
        s.parse::<f64>()
            .map(Point::Real)
            .map_err(|_| CwError::Parse(format!("bad point {s:?}")))
    }
}

impl FromStr for Root {
    type Err = CwError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<u32>() {
            return Ok(Root::Int(v));
        }
        s.parse::<f64>()
            .map(|v| Root::Real(v).normalized())
            .map_err(|_| CwError::Parse(format!("bad root {s:?}")))
    }
}

/// Parameters of `G_{a,alpha,j}(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GSumSpec {
    a: Root,
    alpha: Exponent,
    j: u32,
    x: Point,
}

impl GSumSpec {
    pub fn new(a: Root, alpha: Exponent, j: u32, x: Point) -> Result<Self> {
        let a = a.normalized();
        match a {
            Root::Int(v) if v < 2 => return Err(invalid(format!("root a = {v} must exceed 1"))),
            Root::Real(v) if !(v.is_finite() && v > 1.0) => {
                return Err(invalid(format!("root a = {v} must be a finite real > 1")))
            }
            _ => {}
        }
        if !alpha.is_finite() {
            return Err(invalid("alpha must be finite"));
        }
        if j >= 1 && alpha.is_negative() {
            return Err(invalid(format!(
                "alpha = {alpha} < 0 is only allowed for j = 0"
            )));
        }
        if j > MAX_DEGREE {
            return Err(invalid(format!(
                "Bernoulli index j = {j} exceeds {MAX_DEGREE}"
            )));
        }
        if let Point::Real(v) = x {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(format!(
                    "x = {v} must be a finite non-negative real"
                )));
            }
            if v >= 1.8e19 {
                return Err(invalid(format!("x = {v} exceeds the supported range")));
            }
        }
        Ok(GSumSpec { a, alpha, j, x })
    }

    /// The `a = 2` sum `G_{alpha,j}(x)` of integer `x`, integer `alpha`.
    pub fn classic(alpha: i64, j: u32, x: u64) -> Result<Self> {
        Self::new(Root::Int(2), Exponent::Int(alpha), j, Point::Int(x))
    }

    pub fn a(&self) -> Root {
        self.a
    }

    pub fn alpha(&self) -> Exponent {
        self.alpha
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn x(&self) -> Point {
        self.x
    }

    pub fn with_x(&self, x: Point) -> Result<Self> {
        Self::new(self.a, self.alpha, self.j, x)
    }

    /// Exact evaluation is possible: integer `x` and integer `alpha`.
    pub fn is_exact(&self) -> bool {
        matches!(self.x, Point::Int(_)) && matches!(self.alpha, Exponent::Int(_))
    }

    /// `D`, the largest `d` with `d^a <= x`.
    pub fn cutoff(&self) -> Result<u64> {
        cutoff(self.a, self.x)
    }
}

/// A sum value: exact rational or double.
#[derive(Debug, Clone, PartialEq)]
pub enum GValue {
    Exact(Rational),
    Float(f64),
}

impl GValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            GValue::Exact(q) => q.to_f64(),
            GValue::Float(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            GValue::Exact(q) => Some(q),
            GValue::Float(_) => None,
        }
    }

    /// High-precision decimal value.
    pub fn to_hp(&self) -> Float {
        match self {
            GValue::Exact(q) => hp(q),
            GValue::Float(v) => hp(*v),
        }
    }
}

impl fmt::Display for GValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GValue::Exact(q) => write!(f, "{q}"),
            GValue::Float(v) => write!(f, "{v:e}"),
        }
    }
}

/// Largest `d` with `d^a <= x`.
///
/// Integer `a` uses the exact integer root of `floor(x)`. A non-integer `a`
/// is compared exactly as `d^p <= x^q` when `a = p/q` has small terms, and
/// otherwise through `a ln d <= ln x` at 128-bit precision.
pub fn cutoff(a: Root, x: Point) -> Result<u64> {
    if x.to_f64() < 1.0 {
        return Ok(0);
    }
    match a.normalized() {
        Root::Int(a) => integer_root(x.floor(), a),
        Root::Real(a) => {
            let below = RealRootTest::new(a, x);
            let mut d = (x.to_f64().ln() / a).exp().floor().max(1.0) as u64;
            while d > 1 && !below.accepts(d) {
                d -= 1;
            }
            while below.accepts(d + 1) {
                d += 1;
            }
            Ok(d)
        }
    }
}

enum RealRootTest {
    // d^p * xd^q <= xn^q
    Exact {
        p: u32,
        q: u32,
        xn_q: Integer,
        xd: Integer,
    },
    Log {
        a: Float,
        ln_x: Float,
    },
}

impl RealRootTest {
    const MAX_TERM: u32 = 4096;

    fn new(a: f64, x: Point) -> Self {
        let ar = Rational::from_f64(a).expect("finite root");
        let small = |v: &Integer| v.to_u32().filter(|&v| v <= Self::MAX_TERM);
        if let (Some(p), Some(q)) = (small(ar.numer()), small(ar.denom())) {
            let xr = x.to_rational();
            let xn_q = Integer::from(xr.numer().pow(q));
            return RealRootTest::Exact {
                p,
                q,
                xn_q,
                xd: xr.denom().clone(),
            };
        }
        RealRootTest::Log {
            a: hp(a),
            ln_x: hp(&x.to_rational()).ln(),
        }
    }

    fn accepts(&self, d: u64) -> bool {
        match self {
            RealRootTest::Exact { p, q, xn_q, xd } => {
                let lhs = Integer::from(d).pow(*p) * Integer::from(xd.pow(*q));
                lhs <= *xn_q
            }
            RealRootTest::Log { a, ln_x } => {
                let lhs = Float::with_val(PREC, Float::with_val(PREC, d).ln() * a);
                lhs <= *ln_x
            }
        }
    }
}

/// Block starts `N = 1, 2, 4, ...` with `N < D`; block `N` covers `(N, min(2N, D)]`.
/// Together with the head term `d = 1` they tile `[1, D]`.
pub fn dyadic_blocks(cutoff: u64) -> Vec<u64> {
    std::iter::successors(Some(1u64), |n| n.checked_mul(2))
        .take_while(|&n| n < cutoff)
        .collect()
}

/// `G_{a,alpha,j}(x)`, exact when `spec.is_exact()`.
pub fn g_sum(spec: &GSumSpec) -> Result<GValue> {
    let d_max = spec.cutoff()?;
    range_sum(spec, 1, d_max)
}

/// `G_{a,alpha,j}(x)` in the floating-point path regardless of exactness.
pub fn g_sum_f64(spec: &GSumSpec) -> Result<f64> {
    let d_max = spec.cutoff()?;
    Ok(float_range_sum(spec, 1, d_max)?.value())
}

/// The dyadic block `sum_{N < d <= 2N, d <= D} d^alpha B_j({x/d})`.
pub fn block_g(n_start: u64, spec: &GSumSpec) -> Result<GValue> {
    if n_start == 0 {
        return Err(invalid("block start N must be >= 1"));
    }
    let d_max = spec.cutoff()?;
    let hi = n_start.saturating_mul(2).min(d_max);
    range_sum(spec, n_start + 1, hi)
}

fn range_sum(spec: &GSumSpec, lo: u64, hi: u64) -> Result<GValue> {
    match (spec.x, spec.alpha) {
        (Point::Int(x), Exponent::Int(alpha)) => {
            Ok(GValue::Exact(exact_range_sum(x, alpha, spec.j, lo, hi)?))
        }
        _ => Ok(GValue::Float(float_range_sum(spec, lo, hi)?.value())),
    }
}

/// Exact `sum_{lo <= d <= hi}`, split on dyadic block boundaries so each
/// block shares one common denominator.
fn exact_range_sum(x: u64, alpha: i64, j: u32, lo: u64, hi: u64) -> Result<Rational> {
    if lo > hi {
        return Ok(Rational::new());
    }
    let poly = BernoulliPoly::get(j)?;
    let mut pieces = Vec::new();
    let mut start = lo;
    while start <= hi {
        // start lies in the head {1} or in (N, 2N] with N = 2^floor(log2(start - 1))
        let block_end = if start == 1 {
            1
        } else {
            (1u64 << (63 - (start - 1).leading_zeros())).saturating_mul(2)
        };
        let end = block_end.min(hi);
        pieces.push((start, end));
        start = end + 1;
    }
    let parts: Vec<Rational> = pieces
        .into_par_iter()
        .map(|(s, e)| exact_block(poly, x, alpha, s, e))
        .collect();
    Ok(parts.into_iter().sum())
}

/// One block with denominator `Q * lcm(d)^m`, `m = max(j - alpha, 0)`.
fn exact_block(poly: &BernoulliPoly, x: u64, alpha: i64, lo: u64, hi: u64) -> Rational {
    let j = poly.degree() as i64;
    let excess = alpha - j;
    let xi = Integer::from(x);
    if excess >= 0 {
        let e = excess as u32;
        let mut num = Integer::new();
        for d in lo..=hi {
            let di = Integer::from(d);
            let r = Integer::from(&xi % &di);
            num += poly.scaled_numerator(&r, &di) * Integer::from((&di).pow(e));
        }
        return Rational::from((num, poly.denom().clone()));
    }
    let m = (-excess) as u32;
    let lcm = (lo..=hi).fold(Integer::from(1), |acc, d| acc.lcm(&Integer::from(d)));
    let common = Integer::from((&lcm).pow(m));
    let mut num = Integer::new();
    for d in lo..=hi {
        let di = Integer::from(d);
        let r = Integer::from(&xi % &di);
        let scale = &common / Integer::from((&di).pow(m));
        num += poly.scaled_numerator(&r, &di) * scale;
    }
    Rational::from((num, Integer::from(&common * poly.denom())))
}

fn float_range_sum(spec: &GSumSpec, lo: u64, hi: u64) -> Result<CompensatedSum> {
    if lo > hi {
        return Ok(CompensatedSum::new());
    }
    let poly = BernoulliPoly::get(spec.j)?;
    let x = spec.x;
    let alpha = spec.alpha;
    let chunks: Vec<(u64, u64)> = (0..=(hi - lo) / CHUNK)
        .map(|i| {
            let s = lo + i * CHUNK;
            (s, (s + CHUNK - 1).min(hi))
        })
        .collect();
    let parts: Vec<CompensatedSum> = chunks
        .into_par_iter()
        .map(|(s, e)| {
            (s..=e)
                .map(|d| weight(d, alpha) * bernoulli_at(poly, x, d))
                .collect()
        })
        .collect();
    let mut total = CompensatedSum::new();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

fn weight(d: u64, alpha: Exponent) -> f64 {
    match alpha {
        Exponent::Int(0) => 1.0,
        Exponent::Int(k) if k.unsigned_abs() <= i32::MAX as u64 => (d as f64).powi(k as i32),
        other => (d as f64).powf(other.to_f64()),
    }
}

/// `B_j({x/d})` in doubles; for integer `x` the fractional part comes from
/// the exact remainder.
fn bernoulli_at(poly: &BernoulliPoly, x: Point, d: u64) -> f64 {
    if poly.degree() == 0 {
        return 1.0;
    }
    let frac = match x {
        Point::Int(x) => (x % d) as f64 / d as f64,
        Point::Real(x) => {
            let q = x / d as f64;
            q - q.floor()
        }
    };
    if poly.degree() == 1 {
        frac - 0.5
    } else {
        poly.eval_f64(frac)
    }
}

/// `sum_{N < n <= 2N} psi(4x/(4n + a) + b/4)` for `|a| + |b| <= 1` and
/// `3 <= N <= sqrt(x)`; exact for integer `x`.
pub fn bw_block_sum(n_start: u64, x: Point, a: i32, b: i32) -> Result<GValue> {
    if a.unsigned_abs() + b.unsigned_abs() > 1 {
        return Err(invalid(format!(
            "|a| + |b| = {} exceeds 1",
            a.abs() + b.abs()
        )));
    }
    if n_start < 3 {
        return Err(invalid(format!("block start N = {n_start} must be >= 3")));
    }
    let xf = x.to_f64();
    if !xf.is_finite() || xf < 1.0 {
        return Err(invalid("x must be a finite real >= 1"));
    }
    // N <= sqrt(x)  <=>  N^2 <= x
    let n_sq = (n_start as u128) * (n_start as u128);
    let in_range = match x {
        Point::Int(v) => n_sq <= v as u128,
        Point::Real(v) => n_sq <= Rational::from_f64(v).expect("finite"),
    };
    if !in_range {
        return Err(invalid(format!(
            "block start N = {n_start} exceeds sqrt(x)"
        )));
    }
    let range = (n_start + 1)..=(2 * n_start);
    match x {
        Point::Int(v) => {
            // 4x/(4n+a) + b/4 = (16x + b(4n+a)) / (4(4n+a))
            let sum: Rational = range
                .into_par_iter()
                .map(|n| {
                    let den = 4 * n as i128 + a as i128;
                    let num = 16 * v as i128 + b as i128 * den;
                    psi_exact(&Rational::from((
                        Integer::from(num),
                        Integer::from(4 * den),
                    )))
                })
                .collect::<Vec<_>>()
                .into_iter()
                .sum();
            Ok(GValue::Exact(sum))
        }
        Point::Real(v) => {
            let sum: CompensatedSum = range
                .map(|n| psi(4.0 * v / (4.0 * n as f64 + a as f64) + b as f64 / 4.0))
                .collect();
            Ok(GValue::Float(sum.value()))
        }
    }
}
