//! Closed-form main terms and error exponents for the restricted divisor
//! summatory functions, the Euler–Maclaurin partial sums they are built
//! from, and the `theta` constants. Everything is evaluated at 128-bit
//! precision so residuals at `x ~ 1e12` survive the subtraction.

use std::fmt;
use std::sync::OnceLock;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::bernoulli::BernoulliPoly;
use crate::error::{invalid, CwError, Result};
use crate::numeric::{format_hp, hp, Exponent, PREC};

/// Euler–Mascheroni constant to 50 decimal places.
pub const EULER_GAMMA_50: &str = "0.57721566490153286060651209008240243104215933593992";

/// Required agreement between the stored constant and the recomputation.
const GAMMA_CHECK_TOLERANCE: f64 = 1e-20;

/// The stored `gamma`, cross-checked on first use.
pub fn euler_gamma() -> &'static Float {
    static GAMMA: OnceLock<Float> = OnceLock::new();
    GAMMA.get_or_init(|| {
        let stored = Float::with_val(PREC, Float::parse(EULER_GAMMA_50).expect("valid literal"));
        let diff = Float::with_val(PREC, &stored - euler_gamma_independent()).abs();
        assert!(
            diff < GAMMA_CHECK_TOLERANCE,
            "stored Euler-Mascheroni constant disagrees with recomputation by {diff}"
        );
        stored
    })
}

/// `gamma = H_N - ln N - 1/(2N) + sum_k B_2k / (2k N^2k)` with `N = 10^4`
/// and five correction terms, at 256 bits. Truncation error ~ `1e-42`.
pub fn euler_gamma_independent() -> Float {
    const N: u32 = 10_000;
    const WORK: u32 = 256;
    let mut harmonic = Float::with_val(WORK, 0);
    for d in (1..=N).rev() {
        harmonic += Float::with_val(WORK, 1) / d;
    }
    let n = Float::with_val(WORK, N);
    let mut gamma =
        harmonic - Float::with_val(WORK, n.ln_ref()) - Float::with_val(WORK, 1) / (2 * N);
    for k in 1..=5u32 {
        let b2k = BernoulliPoly::get(2 * k)
            .expect("small degree")
            .eval_rational(&Rational::new());
        let denom = Integer::from(2 * k) * Integer::from(N).pow(2 * k);
        gamma += Float::with_val(WORK, b2k / denom);
    }
    Float::with_val(PREC, gamma)
}

/// `1/4`, the additive part of `theta` under the Chowla–Walum conjecture.
pub fn cw_offset() -> Rational {
    Rational::from((1, 4))
}

/// `517/1648`, the unconditional additive part of `theta`.
pub fn bourgain_watt_offset() -> Rational {
    Rational::from((517, 1648))
}

/// `theta_alpha = alpha/2 + (1/4 or 517/1648)`.
pub fn theta_exponent(alpha: Exponent, cw: bool) -> Rational {
    let offset = if cw {
        cw_offset()
    } else {
        bourgain_watt_offset()
    };
    alpha.to_rational() / 2u32 + offset
}

/// Smallest `alpha` with `theta_alpha >= 1`, where the linear term of the
/// `alpha > 0` main term is absorbed by the error term.
pub fn absorption_threshold(cw: bool) -> Rational {
    let offset = if cw {
        cw_offset()
    } else {
        bourgain_watt_offset()
    };
    (Rational::from(1) - offset) * 2u32
}

/// Error exponent of the `a >= 3` summatory formula: `1 - 2/a` for
/// `alpha = 0`, `1 + (alpha - 2)/a` otherwise.
pub fn higher_root_theta(alpha: Exponent, a: u32) -> Rational {
    let a = Rational::from(a);
    if alpha.to_f64() == 0.0 {
        Rational::from(1) - Rational::from(2) / a
    } else {
        Rational::from(1) + (alpha.to_rational() - 2u32) / a
    }
}

/// A term coefficient: exact, or a high-precision real when it involves `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coeff {
    Exact(Rational),
    Real(Float),
}

impl Coeff {
    pub fn to_hp(&self) -> Float {
        match self {
            Coeff::Exact(q) => hp(q),
            Coeff::Real(f) => Float::with_val(PREC, f),
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Coeff::Exact(q) => Some(q),
            Coeff::Real(_) => None,
        }
    }

    fn add(&self, other: &Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(Rational::from(a + b)),
            _ => Coeff::Real(self.to_hp() + other.to_hp()),
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Exact(q) => write!(f, "{q}"),
            Coeff::Real(v) => write!(f, "{}", format_hp(v)),
        }
    }
}

/// `coeff * x^exponent * (log x)^log_power`, `log_power` in {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTerm {
    pub coeff: Coeff,
    pub exponent: Rational,
    pub log_power: u32,
}

impl ModelTerm {
    pub fn new(coeff: Coeff, exponent: Rational, log_power: u32) -> Self {
        ModelTerm {
            coeff,
            exponent,
            log_power,
        }
    }

    pub fn eval(&self, x: &Float) -> Float {
        let mut v = Float::with_val(PREC, x.pow(hp(&self.exponent)));
        if self.log_power == 1 {
            v *= Float::with_val(PREC, x.ln_ref());
        }
        v * self.coeff.to_hp()
    }

    fn order_key(&self) -> (&Rational, u32) {
        (&self.exponent, self.log_power)
    }
}

impl fmt::Display for ModelTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*x^({})", self.coeff, self.exponent)?;
        if self.log_power == 1 {
            write!(f, "*log(x)")?;
        }
        Ok(())
    }
}

/// A main-term expansion with its claimed error exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct MainTermModel {
    terms: Vec<ModelTerm>,
    theta: Rational,
    assumes_cw: bool,
}

impl MainTermModel {
    /// Builds a model, merging terms of equal kind and ordering them by
    /// strictly decreasing growth.
    pub fn new(terms: Vec<ModelTerm>, theta: Rational, assumes_cw: bool) -> Self {
        let mut merged: Vec<ModelTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.iter_mut().find(|m| m.order_key() == t.order_key()) {
                Some(m) => m.coeff = m.coeff.add(&t.coeff),
                None => merged.push(t),
            }
        }
        merged.sort_by(|a, b| b.order_key().cmp(&a.order_key()));
        MainTermModel {
            terms: merged,
            theta,
            assumes_cw,
        }
    }

    /// The zero model; residuals against it are the exact values.
    pub fn zero() -> Self {
        MainTermModel::new(Vec::new(), Rational::from(1), false)
    }

    pub fn terms(&self) -> &[ModelTerm] {
        &self.terms
    }

    pub fn theta(&self) -> &Rational {
        &self.theta
    }

    pub fn assumes_cw(&self) -> bool {
        self.assumes_cw
    }

    pub fn eval(&self, x: &Float) -> Float {
        let mut acc = Float::with_val(PREC, 0);
        for t in &self.terms {
            acc += t.eval(x);
        }
        acc
    }

    pub fn eval_u64(&self, x: u64) -> Float {
        self.eval(&hp(x))
    }

    /// Coefficient of `x^exponent (log x)^log_power`, if present.
    pub fn coefficient(&self, exponent: &Rational, log_power: u32) -> Option<&Coeff> {
        self.terms
            .iter()
            .find(|t| t.exponent == *exponent && t.log_power == log_power)
            .map(|t| &t.coeff)
    }
}

impl fmt::Display for MainTermModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn exact(q: Rational) -> Coeff {
    Coeff::Exact(q)
}

fn gamma_minus(q: Rational) -> Coeff {
    Coeff::Real(Float::with_val(PREC, euler_gamma() - hp(&q)))
}

fn linear_coefficient(alpha: &Rational) -> Rational {
    // 5/8 - alpha/8 - 1/alpha
    Rational::from((5, 8)) - Rational::from(alpha / 8u32) - Rational::from(alpha.recip_ref())
}

fn require_nonnegative(alpha: Exponent) -> Result<()> {
    if !alpha.is_finite() || alpha.is_negative() {
        return Err(invalid(format!(
            "alpha = {alpha} must be a finite real >= 0"
        )));
    }
    Ok(())
}

/// Main terms of `sum_{n <= x} sigma~_alpha(n)` (the `a = 2` case).
pub fn square_root_model(alpha: Exponent, cw: bool) -> Result<MainTermModel> {
    require_nonnegative(alpha)?;
    let theta = theta_exponent(alpha, cw);
    let al = alpha.to_rational();
    let one = Rational::from(1);
    if al == 0 {
        let terms = vec![
            ModelTerm::new(exact(Rational::from((1, 2))), one.clone(), 1),
            ModelTerm::new(gamma_minus(Rational::from((1, 2))), one, 0),
            ModelTerm::new(exact(Rational::from((1, 2))), Rational::from((1, 2)), 0),
        ];
        return Ok(MainTermModel::new(terms, theta, cw));
    }
    let lead = Rational::from(2) / (al.clone() * (al.clone() + 2u32));
    let second = Rational::from(1) / ((al.clone() + 1u32) * 2u32);
    let terms = vec![
        ModelTerm::new(exact(lead), Rational::from(1) + al.clone() / 2u32, 0),
        ModelTerm::new(exact(second), (al.clone() + 1u32) / 2u32, 0),
        ModelTerm::new(exact(linear_coefficient(&al)), one, 0),
    ];
    Ok(MainTermModel::new(terms, theta, cw))
}

/// Main terms of `sum_{n <= x} sigma_{a,alpha}(n)` for integer `a >= 3`.
pub fn higher_root_model(alpha: Exponent, a: u32) -> Result<MainTermModel> {
    require_nonnegative(alpha)?;
    if a < 3 {
        return Err(invalid(format!(
            "this expansion needs integer a >= 3, got {a}"
        )));
    }
    let theta = higher_root_theta(alpha, a);
    let al = alpha.to_rational();
    let ar = Rational::from(a);
    let one = Rational::from(1);
    if al == 0 {
        let terms = vec![
            ModelTerm::new(exact(ar.clone().recip()), one.clone(), 1),
            ModelTerm::new(gamma_minus(ar.recip()), one, 0),
        ];
        return Ok(MainTermModel::new(terms, theta, false));
    }
    let lead = ar.clone() / (al.clone() * (al.clone() + ar.clone()));
    let terms = vec![
        ModelTerm::new(exact(lead), Rational::from(1) + al.clone() / ar, 0),
        ModelTerm::new(exact(linear_coefficient(&al)), one, 0),
    ];
    Ok(MainTermModel::new(terms, theta, false))
}

/// The first-order baseline `(2/3) x^(3/2)` with its `O(x log x)` error.
pub fn tau_tilde_baseline_model() -> MainTermModel {
    MainTermModel::new(
        vec![ModelTerm::new(
            exact(Rational::from((2, 3))),
            Rational::from((3, 2)),
            0,
        )],
        Rational::from(1),
        false,
    )
}

/// `square_root_model(alpha, cw)` evaluated at `x >= 2`.
pub fn main_term_square_root(x: &Float, alpha: Exponent, cw: bool) -> Result<Float> {
    require_x(x, 2)?;
    Ok(square_root_model(alpha, cw)?.eval(x))
}

/// `higher_root_model(alpha, a)` evaluated at `x >= 2`.
pub fn main_term_higher_root(x: &Float, alpha: Exponent, a: u32) -> Result<Float> {
    require_x(x, 2)?;
    Ok(higher_root_model(alpha, a)?.eval(x))
}

fn require_x(x: &Float, min: u32) -> Result<()> {
    if !x.is_finite() || *x < min {
        return Err(invalid(format!("x = {} must be >= {min}", format_hp(x))));
    }
    Ok(())
}

/// Approximation to `sum_{d <= x^(1/a)} d^beta` without its error term:
///
/// * `beta = -1`: `(1/a) log x + gamma - psi(x^(1/a)) x^(-1/a)`
/// * `beta > -1`: `x^((beta+1)/a)/(beta+1) - psi(x^(1/a)) x^(beta/a) + 1/2 - beta/8 - 1/(beta+1)`
pub fn euler_maclaurin_partial_sum(x: &Float, a: f64, beta: f64) -> Result<Float> {
    require_x(x, 1)?;
    if !(a.is_finite() && a >= 1.0) {
        return Err(invalid(format!("a = {a} must be >= 1")));
    }
    if !beta.is_finite() || beta < -1.0 {
        return Err(CwError::InvalidInput(format!(
            "beta = {beta} must be >= -1"
        )));
    }
    let inv_a = Float::with_val(PREC, hp(1) / hp(a));
    let root = Float::with_val(PREC, x.pow(&inv_a));
    let psi_root = Float::with_val(PREC, &root - Float::with_val(PREC, root.floor_ref())) - 0.5f64;
    if beta == -1.0 {
        let log_term = Float::with_val(PREC, x.ln_ref()) * &inv_a;
        let psi_term = Float::with_val(PREC, &psi_root / &root);
        return Ok(log_term + euler_gamma() - psi_term);
    }
    let b1 = hp(beta) + 1u32;
    let main = Float::with_val(PREC, (&root).pow(&b1)) / &b1;
    let psi_term = psi_root * Float::with_val(PREC, root.pow(hp(beta)));
    let constant = hp(0.5) - hp(beta) / 8u32 - Float::with_val(PREC, b1.recip_ref());
    Ok(main - psi_term + constant)
}

/// Convenience wrapper for integer `x`.
pub fn euler_maclaurin_partial_sum_u64(x: u64, a: f64, beta: f64) -> Result<Float> {
    euler_maclaurin_partial_sum(&hp(x), a, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn gamma_constant_is_consistent() {
        let diff = Float::with_val(PREC, euler_gamma() - euler_gamma_independent()).abs();
        assert!(diff < 1e-35, "{diff}");
        let mpfr = Float::with_val(PREC, rug::float::Constant::Euler);
        assert!(Float::with_val(PREC, euler_gamma() - mpfr).abs() < 1e-37);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_exponent(Exponent::Int(0), false), q(517, 1648));
        assert_eq!(theta_exponent(Exponent::Int(1), true), q(3, 4));
        assert_eq!(theta_exponent(Exponent::Int(0), true), q(1, 4));
        assert_eq!(theta_exponent(Exponent::Int(1), false), q(1341, 1648));
        assert_eq!(theta_exponent(Exponent::Real(0.5), true), q(1, 2));
    }

    #[test]
    fn absorption_examples() {
        assert_eq!(absorption_threshold(true), q(3, 2));
        assert_eq!(absorption_threshold(false), q(1131, 824));
        for cw in [true, false] {
            let at = absorption_threshold(cw);
            // 1131/824 is not dyadic, so check the defining equation in rationals
            let theta = at / 2u32
                + if cw {
                    cw_offset()
                } else {
                    bourgain_watt_offset()
                };
            assert_eq!(theta, 1);
        }
    }

    #[test]
    fn square_root_model_alpha1_collapses_to_two_terms() {
        let m = square_root_model(Exponent::Int(1), false).unwrap();
        assert_eq!(m.terms().len(), 2);
        assert_eq!(m.coefficient(&q(3, 2), 0).unwrap().exact(), Some(&q(2, 3)));
        assert_eq!(m.coefficient(&q(1, 1), 0).unwrap().exact(), Some(&q(-1, 4)));
        assert_eq!(m.theta(), &q(1341, 1648));
    }

    #[test]
    fn square_root_model_alpha0_at_e_squared() {
        let x = Float::with_val(PREC, 2).exp();
        let e = Float::with_val(PREC, 1).exp();
        let got = main_term_square_root(&x, Exponent::Int(0), true).unwrap();
        let expect = Float::with_val(PREC, &x * (Float::with_val(PREC, euler_gamma() + 0.5f64)))
            + Float::with_val(PREC, e / 2u32);
        assert!(Float::with_val(PREC, got - expect).abs() < 1e-30);
    }

    #[test]
    fn square_root_model_rejects_negative_alpha() {
        assert!(square_root_model(Exponent::Int(-1), true).is_err());
        assert!(main_term_square_root(&hp(1), Exponent::Int(0), true).is_err());
    }

    #[test]
    fn higher_root_model_examples() {
        for a in 3..=8u32 {
            let m = higher_root_model(Exponent::Int(1), a).unwrap();
            let lead = m
                .coefficient(&(Rational::from(1) + q(1, a as i64)), 0)
                .unwrap();
            assert_eq!(lead.exact(), Some(&q(a as i64, a as i64 + 1)));
            assert_eq!(m.coefficient(&q(1, 1), 0).unwrap().exact(), Some(&q(-1, 2)));
            assert_eq!(m.theta(), &(Rational::from(1) - q(1, a as i64)));
        }
        assert_eq!(
            higher_root_model(Exponent::Int(0), 3).unwrap().theta(),
            &q(1, 3)
        );
        assert_eq!(
            higher_root_model(Exponent::Int(2), 4).unwrap().theta(),
            &q(1, 1)
        );
        assert!(higher_root_model(Exponent::Int(0), 2).is_err());
    }

    #[test]
    fn terms_strictly_decreasing() {
        for alpha in [0.0, 0.25, 1.0, 1.5, 2.0, 3.0] {
            let m = square_root_model(Exponent::Real(alpha), false).unwrap();
            for w in m.terms().windows(2) {
                assert!(w[0].order_key() > w[1].order_key(), "alpha={alpha}");
            }
            for t in m.terms() {
                assert!(t.coeff.to_hp().is_finite());
            }
        }
    }

    #[test]
    fn em_harmonic_example() {
        let x = hp(1_000_000u64);
        let approx = euler_maclaurin_partial_sum(&x, 2.0, -1.0).unwrap();
        let mut h = Float::with_val(PREC, 0);
        for d in (1..=1000u32).rev() {
            h += hp(1) / d;
        }
        assert!(Float::with_val(PREC, h - approx).abs() < 1e-5);
    }

    #[test]
    fn em_perfect_square_example() {
        for k in [3u64, 10, 1000, 123_456] {
            let x = k * k;
            let got = euler_maclaurin_partial_sum_u64(x, 2.0, 1.0).unwrap();
            let expect = hp(x) / 2u32 + hp(k) / 2u32 - hp(0.125);
            assert!(Float::with_val(PREC, got - expect).abs() < 1e-25, "k={k}");
        }
    }

    #[test]
    fn em_residual_window_example() {
        let x = 1_000_000u64;
        let exact = hp(1000u64 * 1001 / 2);
        let r = exact - euler_maclaurin_partial_sum_u64(x, 2.0, 1.0).unwrap();
        assert!(r >= 0 && r <= 0.125);
        assert!(euler_maclaurin_partial_sum_u64(x, 2.0, -1.5).is_err());
        assert!(euler_maclaurin_partial_sum_u64(x, 0.5, 1.0).is_err());
    }

    #[test]
    fn em_real_beta_against_direct_sum() {
        // beta = 1/2, a = 3: the O(x^((beta-1)/a)) error is small
        let x = 1.0e9f64;
        let approx = euler_maclaurin_partial_sum(&hp(x), 3.0, 0.5)
            .unwrap()
            .to_f64();
        let direct: f64 = (1..=1000u32).map(|d| (d as f64).sqrt()).sum();
        assert!((direct - approx).abs() < 0.1, "{direct} vs {approx}");
    }

    #[test]
    fn theta_monotone_and_cw_below_unconditional() {
        let mut prev = theta_exponent(Exponent::Real(0.0), true);
        for i in 1..100 {
            let alpha = Exponent::Real(i as f64 * 0.05);
            let t = theta_exponent(alpha, true);
            assert!(t > prev);
            assert!(t <= theta_exponent(alpha, false));
            prev = t;
        }
    }
}
