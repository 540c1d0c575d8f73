use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

use cwlab::bernoulli::BernoulliPoly;
use cwlab::cw_sums::{block_g, dyadic_blocks, g_sum, g_sum_f64, GSumSpec, Point, Root};
use cwlab::divisors::integer_root;
use cwlab::Exponent;

fn spec(a: u32, alpha: i64, j: u32, x: u64) -> GSumSpec {
    GSumSpec::new(Root::Int(a), Exponent::Int(alpha), j, Point::Int(x)).unwrap()
}

#[test]
fn j0_alpha0_counts_the_cutoff() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xs = (1..=3_000u64).chain((0..300).map(|_| rng.gen_range(3_001..=1_000_000u64)));
    for x in xs {
        for a in [2, 3, 5] {
            let g = g_sum(&spec(a, 0, 0, x)).unwrap();
            assert_eq!(
                g.exact().unwrap(),
                &Rational::from(integer_root(x, a).unwrap()),
                "x={x} a={a}"
            );
        }
    }
}

#[test]
fn psi_sum_within_trivial_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let x = rng.gen_range(1..=1_000_000_000u64);
        let a = rng.gen_range(2..=4);
        let s = spec(a, 0, 1, x);
        let d = s.cutoff().unwrap() as f64;
        assert!(g_sum_f64(&s).unwrap().abs() <= d / 2.0, "x={x} a={a}");
    }
}

#[test]
fn blocks_reassemble_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1_000 {
        let x = rng.gen_range(1..=2_000_000u64);
        let a = rng.gen_range(2..=3);
        let alpha = rng.gen_range(0..=2);
        let j = rng.gen_range(0..=3);
        let s = spec(a, alpha, j, x);
        let whole = g_sum(&s).unwrap();
        // head term d = 1 is B_j({x}) = B_j(0) for integer x
        let mut sum = BernoulliPoly::get(j).unwrap().coeffs()[0].clone();
        for n in dyadic_blocks(s.cutoff().unwrap()) {
            sum += block_g(n, &s).unwrap().exact().unwrap();
        }
        assert_eq!(
            &sum,
            whole.exact().unwrap(),
            "x={x} a={a} alpha={alpha} j={j}"
        );
    }
}

#[test]
fn exact_and_float_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..150 {
        let x = rng.gen_range(1..=1_000_000_000u64);
        let j = rng.gen_range(1..=3);
        let alpha = rng.gen_range(0..=2);
        let s = spec(2, alpha, j, x);
        let exact = g_sum(&s).unwrap().to_f64();
        let approx = g_sum_f64(&s).unwrap();
        // relative to the size of the summands, since G itself may cancel
        let scale = (s.cutoff().unwrap() as f64).powi(alpha as i32 + 1);
        assert!(
            (exact - approx).abs() <= 1e-8 * scale,
            "x={x} j={j} alpha={alpha}: {exact} vs {approx}"
        );
    }
}

#[test]
fn real_root_matches_direct_sum() {
    for x in [10u64, 1_000, 123_457, 9_999_991] {
        let s = GSumSpec::new(Root::Real(2.5), Exponent::Real(0.5), 1, Point::Int(x)).unwrap();
        let d_max = s.cutoff().unwrap();
        let direct: f64 = (1..=d_max)
            .map(|d| (d as f64).sqrt() * (((x % d) as f64 / d as f64) - 0.5))
            .sum();
        assert!((g_sum_f64(&s).unwrap() - direct).abs() < 1e-9 * (d_max as f64).powf(1.5));
    }
}
