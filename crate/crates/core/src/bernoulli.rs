//! Bernoulli polynomials, the periodic Bernoulli functions `B_j({x})`, the
//! sawtooth `psi`, and the truncated Fourier series of `B_j({t})`.
//!
//! Coefficients come from the defining recurrence `B_j' = j B_{j-1}`,
//! `int_0^1 B_j = 0`, in exact rationals, and are memoized per degree.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rug::{Integer, Rational};

use crate::error::{invalid, Result};

/// Largest supported degree.
pub const MAX_DEGREE: u32 = 64;

/// `B_j` in the monomial basis, `coeffs[i]` multiplying `x^i`.
#[derive(Debug, Clone)]
pub struct BernoulliPoly {
    degree: u32,
    coeffs: Vec<Rational>,
    // `coeffs[i] * denom`, all integral.
    int_coeffs: Vec<Integer>,
    denom: Integer,
    f64_coeffs: Vec<f64>,
}

static TABLE: [OnceLock<BernoulliPoly>; MAX_DEGREE as usize + 1] =
    [const { OnceLock::new() }; MAX_DEGREE as usize + 1];

impl BernoulliPoly {
    /// The memoized polynomial of degree `j`.
    pub fn get(j: u32) -> Result<&'static BernoulliPoly> {
        if j > MAX_DEGREE {
            return Err(invalid(format!(
                "Bernoulli degree {j} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        Ok(Self::get_unchecked(j))
    }

    fn get_unchecked(j: u32) -> &'static BernoulliPoly {
        TABLE[j as usize].get_or_init(|| {
            if j == 0 {
                BernoulliPoly::from_coeffs(0, vec![Rational::from(1)])
            } else {
                BernoulliPoly::integrate(Self::get_unchecked(j - 1))
            }
        })
    }

    fn integrate(prev: &BernoulliPoly) -> BernoulliPoly {
        let j = prev.degree + 1;
        let mut coeffs = vec![Rational::new(); j as usize + 1];
        for (i, b) in prev.coeffs.iter().enumerate() {
            coeffs[i + 1] = Rational::from(b * j) / (i as u32 + 1);
        }
        // Constant term fixed by a zero mean over [0, 1].
        let mean: Rational = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| Rational::from(c / (i as u32 + 1)))
            .sum();
        coeffs[0] = -mean;
        BernoulliPoly::from_coeffs(j, coeffs)
    }

    fn from_coeffs(degree: u32, coeffs: Vec<Rational>) -> BernoulliPoly {
        let denom = coeffs
            .iter()
            .fold(Integer::from(1), |acc, c| acc.lcm(c.denom()));
        let int_coeffs = coeffs
            .iter()
            .map(|c| c.numer() * Integer::from(&denom / c.denom()))
            .collect();
        let f64_coeffs = coeffs.iter().map(|c| c.to_f64()).collect();
        BernoulliPoly {
            degree,
            coeffs,
            int_coeffs,
            denom,
            f64_coeffs,
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Common denominator `Q` of the coefficients.
    pub fn denom(&self) -> &Integer {
        &self.denom
    }

    /// `Q * B_j(r / d) * d^j`, an integer: `sum_i (Q c_i) r^i d^(j-i)`.
    pub fn scaled_numerator(&self, r: &Integer, d: &Integer) -> Integer {
        // Homogeneous Horner: acc <- acc * r + c_i * d^(j-i), i descending.
        let mut acc = Integer::new();
        let mut dpow = Integer::from(1);
        for c in self.int_coeffs.iter().rev() {
            acc *= r;
            acc += Integer::from(c * &dpow);
            dpow *= d;
        }
        acc
    }

    /// Exact evaluation.
    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Fast double-precision Horner evaluation, for hot loops on `[0, 1)`.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.f64_coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// `B_j(x)`, evaluated exactly in rationals and rounded once.
pub fn bernoulli_poly(j: u32, x: f64) -> Result<f64> {
    let x = finite_rational(x)?;
    Ok(BernoulliPoly::get(j)?.eval_rational(&x).to_f64())
}

/// The sawtooth `x - floor(x) - 1/2`.
pub fn psi(x: f64) -> f64 {
    (x - x.floor()) - 0.5
}

/// Exact sawtooth of a rational argument.
pub fn psi_exact(x: &Rational) -> Rational {
    let fl = Integer::from(x.floor_ref());
    Rational::from(x - fl) - Rational::from((1, 2))
}

/// Exact `psi(p / q)` for integers, `q != 0`.
pub fn psi_ratio(p: i128, q: i128) -> Result<Rational> {
    if q == 0 {
        return Err(invalid("psi_ratio: zero denominator"));
    }
    Ok(psi_exact(&Rational::from((
        Integer::from(p),
        Integer::from(q),
    ))))
}

/// The periodic Bernoulli function `B_j({x})`, `j >= 1`.
pub fn bernoulli_func(j: u32, x: f64) -> Result<f64> {
    if j == 0 {
        return Err(invalid("bernoulli_func requires j >= 1"));
    }
    let poly = BernoulliPoly::get(j)?;
    if j == 1 {
        return Ok(psi(x));
    }
    let x = finite_rational(x)?;
    let (frac, _) = <(Rational, Integer)>::from(x.fract_floor_ref());
    Ok(poly.eval_rational(&frac).to_f64())
}

/// Exact `B_j({x})` for a rational argument, `j >= 1`.
pub fn bernoulli_func_exact(j: u32, x: &Rational) -> Result<Rational> {
    if j == 0 {
        return Err(invalid("bernoulli_func requires j >= 1"));
    }
    let poly = BernoulliPoly::get(j)?;
    let (frac, _) = <(Rational, Integer)>::from(x.fract_floor_ref());
    Ok(poly.eval_rational(&frac))
}

/// Symmetric partial sum over `0 < |m| <= terms` of
/// `-j!/(2 pi i)^j sum e(m t)/m^j`, folded into its real cosine (even `j`)
/// or sine (odd `j`) form.
pub fn bernoulli_fourier_truncated(j: u32, t: f64, terms: u64) -> Result<f64> {
    if j < 2 {
        return Err(invalid(
            "Fourier representation needs j >= 2 for absolute convergence",
        ));
    }
    if j > MAX_DEGREE {
        return Err(invalid(format!("degree {j} exceeds {MAX_DEGREE}")));
    }
    if terms == 0 {
        return Err(invalid("truncation must be at least 1"));
    }
    if !t.is_finite() {
        return Err(invalid("t must be finite"));
    }
    let tf = t - t.floor();
    let odd = j % 2 == 1;
    let mut series = 0.0;
    // Smallest terms first.
    for m in (1..=terms).rev() {
        let phase = (m as f64 * tf).fract();
        let trig = if odd {
            (2.0 * PI * phase).sin()
        } else {
            (2.0 * PI * phase).cos()
        };
        series += trig / (m as f64).powi(j as i32);
    }
    // (2 pi i)^j = (2 pi)^j i^j; pairing m with -m gives 2 cos (even j) or
    // 2 i sin (odd j), so the i's cancel and only a sign (-1)^floor(j/2) remains.
    let factorial: f64 = (1..=j).map(f64::from).product();
    let sign = if (j / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(-2.0 * factorial / (2.0 * PI).powi(j as i32) * sign * series)
}

fn finite_rational(x: f64) -> Result<Rational> {
    Rational::from_f64(x).ok_or_else(|| invalid(format!("non-finite argument {x}")))
}
