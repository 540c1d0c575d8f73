//! Reduced-scale invariant checks, fast enough to run interactively.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

use crate::bernoulli::{bernoulli_fourier_truncated, bernoulli_func, bernoulli_func_exact};
use crate::cw_sums::{g_sum, g_sum_f64, GSumSpec, Point, Root};
use crate::divisors::{integer_root, is_square, pow_le, tau, DivisorSpec, SumValue};
use crate::error::Result;
use crate::exponent_pairs::{apply_word, ExponentPair};
use crate::numeric::Exponent;
use crate::summatory::{summatory_bruteforce_many, summatory_fast, summatory_total};
use crate::wide::WideInt;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from(name: &'static str, outcome: Result<Option<String>>) -> Self {
        match outcome {
            Ok(None) => CheckResult {
                name,
                passed: true,
                detail: "ok".into(),
            },
            Ok(Some(d)) => CheckResult {
                name,
                passed: false,
                detail: d,
            },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: e.to_string(),
            },
        }
    }
}

const SEED: u64 = 0x5eed_2024;

/// Runs every check and returns the results in a fixed order.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        CheckResult::from("tau_tilde_identity", tau_tilde_identity(20_000)),
        CheckResult::from("integer_root_exact", integer_root_exact(10_000)),
        CheckResult::from("summatory_routes_agree", summatory_routes_agree(3_000)),
        CheckResult::from("g_sum_exact_vs_float", g_sum_exact_vs_float()),
        CheckResult::from("bernoulli_periodic", bernoulli_periodic(1_000)),
        CheckResult::from("bernoulli_fourier", bernoulli_fourier(200)),
        CheckResult::from("exponent_pair_chain", exponent_pair_chain()),
    ]
}

fn tau_tilde_identity(limit: u64) -> Result<Option<String>> {
    for n in 1..=limit {
        let spec = DivisorSpec::exact(2, 0)?;
        let direct = crate::divisors::divisor_sum_restricted(n, &spec)?;
        let twice = tau(n)?.checked_add(WideInt::from(is_square(n) as i64))?;
        if direct != SumValue::Exact(twice.exact_div(2)?) {
            return Ok(Some(format!("identity fails at n = {n}")));
        }
    }
    Ok(None)
}

fn integer_root_exact(samples: usize) -> Result<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..samples {
        let n: u64 = rng.gen_range(1..=1_000_000_000_000_000_000);
        let a: u32 = rng.gen_range(2..=12);
        let r = integer_root(n, a)?;
        if !pow_le(r, a, n) || pow_le(r + 1, a, n) {
            return Ok(Some(format!("root({n}, {a}) = {r} is not the floor root")));
        }
    }
    Ok(None)
}

fn summatory_routes_agree(limit: u64) -> Result<Option<String>> {
    let xs: Vec<u64> = (1..=limit).collect();
    for (a, alpha) in [(2, 0), (2, 1), (3, 0), (3, 2)] {
        let spec = DivisorSpec::exact(a, alpha)?;
        let brute = summatory_bruteforce_many(&xs, &spec)?;
        for (&x, b) in xs.iter().zip(&brute) {
            let total = summatory_total(x, &spec)?;
            if total != *b {
                return Ok(Some(format!(
                    "floor form differs at x = {x}, a = {a}, alpha = {alpha}"
                )));
            }
            if x % 97 == 0 {
                let fast = summatory_fast(x, &spec)?;
                if fast.total != *b || fast.check_interchange().is_err() {
                    return Ok(Some(format!(
                        "decomposition differs at x = {x}, a = {a}, alpha = {alpha}"
                    )));
                }
            }
        }
    }
    Ok(None)
}

fn g_sum_exact_vs_float() -> Result<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    for _ in 0..60 {
        let x: u64 = rng.gen_range(1..=1_000_000_000);
        let j: u32 = rng.gen_range(1..=3);
        let alpha: i64 = rng.gen_range(0..=2);
        let spec = GSumSpec::new(Root::Int(2), Exponent::Int(alpha), j, Point::Int(x))?;
        let exact = g_sum(&spec)?.to_f64();
        let approx = g_sum_f64(&spec)?;
        let scale = (spec.cutoff()? as f64).powi(alpha as i32 + 1).max(1.0);
        if (exact - approx).abs() > 1e-8 * scale {
            return Ok(Some(format!(
                "x = {x}, j = {j}, alpha = {alpha}: {exact} vs {approx}"
            )));
        }
    }
    Ok(None)
}

fn bernoulli_periodic(samples: usize) -> Result<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    for _ in 0..samples {
        let j: u32 = rng.gen_range(1..=6);
        let num: i64 = rng.gen_range(-10_000..=10_000);
        let den: i64 = rng.gen_range(1..=997);
        let x = Rational::from((num, den));
        let shifted = Rational::from(&x + 1u32);
        if bernoulli_func_exact(j, &x)? != bernoulli_func_exact(j, &shifted)? {
            return Ok(Some(format!("B_{j} not periodic at {x}")));
        }
        let t = num as f64 / den as f64;
        if (bernoulli_func(j, t)? - bernoulli_func(j, t + 1.0)?).abs() > 1e-9 {
            return Ok(Some(format!("float B_{j} not periodic at {t}")));
        }
    }
    Ok(None)
}

fn bernoulli_fourier(samples: usize) -> Result<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    for _ in 0..samples {
        let j: u32 = rng.gen_range(2..=4);
        let t: f64 = rng.gen_range(-5.0..5.0);
        let diff = (bernoulli_fourier_truncated(j, t, 1000)? - bernoulli_func(j, t)?).abs();
        if diff > 1e-3 {
            return Ok(Some(format!(
                "Fourier series of B_{j} off by {diff} at {t}"
            )));
        }
    }
    Ok(None)
}

fn exponent_pair_chain() -> Result<Option<String>> {
    let p = apply_word("BA^2", &ExponentPair::bourgain())?;
    let want = ExponentPair::new(Rational::from((76, 207)), Rational::from((110, 207)))?;
    if p != want {
        return Ok(Some(format!("BA^2 gave {p}")));
    }
    let back = apply_word("BB", &ExponentPair::bourgain())?;
    if back != ExponentPair::bourgain() {
        return Ok(Some(format!("BB gave {back}")));
    }
    Ok(None)
}
