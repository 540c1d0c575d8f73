//! Exact exponent-pair algebra: the van der Corput `A` and `B` processes,
//! transform words such as `"BA^2"`, and the exponents they give for the
//! dyadic blocks of `G_{a,alpha,j}`.
//!
//! Pairs are exact rationals; no `epsilon` padding is carried.

use std::fmt;
use std::str::FromStr;

pub use rug::Rational;

use crate::error::{invalid, CwError, Result};

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

/// Parses `"p/q"` or an integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: rug::Integer = n
                .trim()
                .parse()
                .map_err(|_| CwError::Parse(format!("bad numerator in {s:?}")))?;
            let d: rug::Integer = d
                .trim()
                .parse()
                .map_err(|_| CwError::Parse(format!("bad denominator in {s:?}")))?;
            if d == 0 {
                return Err(CwError::Parse(format!("zero denominator in {s:?}")));
            }
            Rational::from((n, d))
        }
        None => Rational::from(
            s.parse::<rug::Integer>()
                .map_err(|_| CwError::Parse(format!("not a rational: {s:?}")))?,
        ),
    };
    Ok(parsed)
}

/// An exponent pair `(k, l)` with `0 <= k <= 1/2 <= l <= 1` and `k <= l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExponentPair {
    k: Rational,
    l: Rational,
}

impl ExponentPair {
    pub fn new(k: Rational, l: Rational) -> Result<Self> {
        let half = q(1, 2);
        if k < 0 || k > half || l < half || l > 1 || k > l {
            return Err(invalid(format!(
                "({k}, {l}) violates 0 <= k <= 1/2 <= l <= 1, k <= l"
            )));
        }
        Ok(ExponentPair { k, l })
    }

    pub fn k(&self) -> &Rational {
        &self.k
    }

    pub fn l(&self) -> &Rational {
        &self.l
    }

    /// The trivial pair `(0, 1)`.
    pub fn trivial() -> Self {
        ExponentPair {
            k: q(0, 1),
            l: q(1, 1),
        }
    }

    /// Bourgain's seed pair `(13/84, 55/84)`.
    pub fn bourgain() -> Self {
        ExponentPair {
            k: q(13, 84),
            l: q(55, 84),
        }
    }

    /// `A(k, l) = (k / (2k + 2), (k + l + 1) / (2k + 2))`.
    pub fn a_process(&self) -> Self {
        let denom = Rational::from(&self.k * 2u32) + 2u32;
        let k = Rational::from(&self.k / &denom);
        let l = (Rational::from(&self.k + &self.l) + 1u32) / denom;
        ExponentPair { k, l }
    }

    /// `B(k, l) = (l - 1/2, k + 1/2)`.
    pub fn b_process(&self) -> Self {
        let half = q(1, 2);
        ExponentPair {
            k: Rational::from(&self.l - &half),
            l: Rational::from(&self.k + &half),
        }
    }

    pub fn apply(&self, step: Process) -> Self {
        match step {
            Process::A => self.a_process(),
            Process::B => self.b_process(),
        }
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.k, self.l)
    }
}

impl FromStr for ExponentPair {
    type Err = CwError;

    /// `"k,l"` with each coordinate a fraction or integer.
    fn from_str(s: &str) -> Result<Self> {
        let (k, l) = s
            .split_once(',')
            .ok_or_else(|| CwError::Parse(format!("expected \"k,l\", got {s:?}")))?;
        ExponentPair::new(parse_rational(k)?, parse_rational(l)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    A,
    B,
}

/// A composition of processes written left to right; the rightmost letter
/// acts first, so `"BA^2"` is `B(A(A(p)))`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransformWord {
    // in written order
    letters: Vec<Process>,
}

impl TransformWord {
    pub fn letters(&self) -> &[Process] {
        &self.letters
    }

    pub fn apply(&self, seed: &ExponentPair) -> ExponentPair {
        self.letters
            .iter()
            .rev()
            .fold(seed.clone(), |p, &step| p.apply(step))
    }
}

impl FromStr for TransformWord {
    type Err = CwError;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let step = match chars[i] {
                'A' => Process::A,
                'B' => Process::B,
                c => return Err(CwError::Parse(format!("unexpected {c:?} in word {s:?}"))),
            };
            i += 1;
            let mut repeat = 1usize;
            if chars.get(i) == Some(&'^') {
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(CwError::Parse(format!(
                        "missing exponent after '^' in {s:?}"
                    )));
                }
                let digits: String = chars[start..i].iter().collect();
                repeat = digits
                    .parse()
                    .ok()
                    .filter(|&r| r <= 10_000)
                    .ok_or_else(|| {
                        CwError::Parse(format!("exponent {digits} too large in {s:?}"))
                    })?;
            }
            letters.extend(std::iter::repeat_n(step, repeat));
        }
        Ok(TransformWord { letters })
    }
}

impl fmt::Display for TransformWord {
    /// Runs collapse to powers: `BAA` prints as `BA^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for run in self.letters.chunk_by(|x, y| x == y) {
            write!(f, "{}", if run[0] == Process::A { 'A' } else { 'B' })?;
            if run.len() > 1 {
                write!(f, "^{}", run.len())?;
            }
        }
        Ok(())
    }
}

/// Parses `word` and applies it to `seed`.
pub fn apply_word(word: &str, seed: &ExponentPair) -> Result<ExponentPair> {
    Ok(word.parse::<TransformWord>()?.apply(seed))
}

/// Which Bernoulli index the bound is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JCase {
    /// `j = 1`, the sawtooth.
    One,
    /// `j >= 2`, through the Fourier series.
    AtLeastTwo,
}

/// `constant + per_inverse_a / a`, an exponent as a function of `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineInInverseA {
    pub constant: Rational,
    pub per_inverse_a: Rational,
}

impl AffineInInverseA {
    pub fn at(&self, a: &Rational) -> Rational {
        Rational::from(&self.per_inverse_a / a) + &self.constant
    }
}

impl fmt::Display for AffineInInverseA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + ({})/a", self.constant, self.per_inverse_a)
    }
}

/// Exponents of the bound `x^(alpha/a + primary) + x^(alpha/a + secondary) log x`
/// for `G_{a,alpha,j}(x)`, both given as offsets beyond `alpha/a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockBoundExponents {
    pub case: JCase,
    /// Primary offset as a function of `a`.
    pub primary: AffineInInverseA,
    /// `2/a - 1`.
    pub secondary: AffineInInverseA,
}

impl BlockBoundExponents {
    pub fn primary_offset(&self, a: &Rational) -> Rational {
        self.primary.at(a)
    }

    pub fn secondary_offset(&self, a: &Rational) -> Rational {
        self.secondary.at(a)
    }

    /// Full primary exponent `alpha/a + primary(a)`.
    pub fn primary_exponent(&self, a: &Rational, alpha: &Rational) -> Rational {
        Rational::from(alpha / a) + self.primary_offset(a)
    }

    /// Full secondary exponent `(alpha + 2)/a - 1`.
    pub fn secondary_exponent(&self, a: &Rational, alpha: &Rational) -> Rational {
        Rational::from(alpha / a) + self.secondary_offset(a)
    }
}

/// Exponent offsets from the pair `p`:
///
/// * `j = 1`: `(k(a-1) + l) / (a(k+1)) = k/(k+1) + ((l-k)/(k+1)) / a`,
///   requiring `alpha (k+1) + l - k >= 0`;
/// * `j >= 2`: `(k(a-2) + l) / a = k + (l - 2k) / a`, requiring
///   `alpha + l - 2k >= 0`.
///
/// The secondary offset is `2/a - 1` in both cases.
pub fn block_bound_exponents(
    p: &ExponentPair,
    case: JCase,
    alpha: &Rational,
) -> Result<BlockBoundExponents> {
    let (k, l) = (p.k(), p.l());
    let primary = match case {
        JCase::One => {
            let kp1 = Rational::from(k + 1u32);
            let side = Rational::from(alpha * &kp1) + l - k;
            if side < 0 {
                return Err(invalid(format!(
                    "side condition alpha(k+1) + l - k >= 0 fails: {alpha}*({kp1}) + {l} - {k} = {side}"
                )));
            }
            AffineInInverseA {
                constant: Rational::from(k / &kp1),
                per_inverse_a: Rational::from(l - k) / kp1,
            }
        }
        JCase::AtLeastTwo => {
            let side = Rational::from(alpha + l) - Rational::from(k * 2u32);
            if side < 0 {
                return Err(invalid(format!(
                    "side condition alpha + l - 2k >= 0 fails: {alpha} + {l} - 2*{k} = {side}"
                )));
            }
            AffineInInverseA {
                constant: k.clone(),
                per_inverse_a: (l - Rational::from(k * 2u32)),
            }
        }
    };
    Ok(BlockBoundExponents {
        case,
        primary,
        secondary: AffineInInverseA {
            constant: q(-1, 1),
            per_inverse_a: q(2, 1),
        },
    })
}

/// A closed interval of `a`; `upper = None` means unbounded above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SettledRange {
    pub lower: Rational,
    pub upper: Option<Rational>,
}

impl fmt::Display for SettledRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.upper {
            Some(u) => write!(f, "[{},{}]", self.lower, u),
            None => write!(f, "[{},inf)", self.lower),
        }
    }
}

/// Range of `a > 1` on which the `j >= 2` bound from `p` reaches the
/// conjectured `x^(alpha/a + 1/(2a))`: both `k + (l-2k)/a <= 1/(2a)` and
/// `2/a - 1 <= 1/(2a)`. `None` when no `a` qualifies.
pub fn settled_alpha_range(p: &ExponentPair) -> Option<SettledRange> {
    let half = q(1, 2);
    // 2/a - 1 <= 1/(2a)  <=>  a >= 3/2
    let lower = q(3, 2);
    // k a + (l - 2k) <= 1/2
    let slack = Rational::from(&half - p.l()) + Rational::from(p.k() * 2u32);
    if *p.k() == 0 {
        return (slack >= 0).then_some(SettledRange { lower, upper: None });
    }
    let upper = slack / p.k();
    (upper >= lower).then_some(SettledRange {
        lower,
        upper: Some(upper),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(k: (i64, i64), l: (i64, i64)) -> ExponentPair {
        ExponentPair::new(q(k.0, k.1), q(l.0, l.1)).unwrap()
    }

    #[test]
    fn a_process_examples() {
        let seed = ExponentPair::bourgain();
        let once = seed.a_process();
        assert_eq!(once, pair((13, 194), (76, 97)));
        assert_eq!(once.a_process(), pair((13, 414), (359, 414)));
        assert_eq!(pair((0, 1), (1, 2)).a_process(), pair((0, 1), (3, 4)));
    }

    #[test]
    fn b_process_examples() {
        assert_eq!(
            pair((13, 414), (359, 414)).b_process(),
            pair((76, 207), (110, 207))
        );
        assert_eq!(
            pair((13, 194), (76, 97)).b_process(),
            pair((55, 194), (55, 97))
        );
    }

    #[test]
    fn word_examples() {
        let seed = ExponentPair::bourgain();
        assert_eq!(
            apply_word("BA^2", &seed).unwrap(),
            pair((76, 207), (110, 207))
        );
        assert_eq!(apply_word("", &seed).unwrap(), seed);
        assert_eq!(apply_word("BA", &seed).unwrap(), pair((55, 194), (55, 97)));
        assert_eq!(
            apply_word("BAA", &seed).unwrap(),
            apply_word("BA^2", &seed).unwrap()
        );
        // the reversed composition does not reproduce the chain
        assert_ne!(
            apply_word("A^2B", &seed).unwrap(),
            pair((76, 207), (110, 207))
        );
    }

    #[test]
    fn word_parse_errors() {
        assert!("BC".parse::<TransformWord>().is_err());
        assert!("A^".parse::<TransformWord>().is_err());
        assert!("A^x".parse::<TransformWord>().is_err());
        assert!("^2".parse::<TransformWord>().is_err());
        assert_eq!("A^0B".parse::<TransformWord>().unwrap().to_string(), "B");
        assert_eq!(
            "BAAB^3A".parse::<TransformWord>().unwrap().to_string(),
            "BA^2B^3A"
        );
    }

    #[test]
    fn pair_parsing_and_validation() {
        assert_eq!(
            "13/84,55/84".parse::<ExponentPair>().unwrap(),
            ExponentPair::bourgain()
        );
        assert_eq!(
            "0, 1".parse::<ExponentPair>().unwrap(),
            ExponentPair::trivial()
        );
        assert!("3/4,1".parse::<ExponentPair>().is_err());
        assert!("1/4".parse::<ExponentPair>().is_err());
        assert!("1/0,1".parse::<ExponentPair>().is_err());
        assert_eq!(ExponentPair::bourgain().to_string(), "13/84,55/84");
    }

    #[test]
    fn block_bound_j1_bourgain() {
        let p = apply_word("BA^2", &ExponentPair::bourgain()).unwrap();
        let e = block_bound_exponents(&p, JCase::One, &q(0, 1)).unwrap();
        assert_eq!(e.primary.constant, q(76, 283));
        assert_eq!(e.primary.per_inverse_a, q(34, 283));
        // against the unsimplified form (k(a-1) + l)/(a(k+1)) at a = 3
        let a = q(3, 1);
        let direct =
            ((p.k() * Rational::from(&a - 1u32)) + p.l()) / (&a * Rational::from(p.k() + 1u32));
        assert_eq!(e.primary_offset(&a), direct);
    }

    #[test]
    fn block_bound_j2_bourgain() {
        let p = apply_word("BA", &ExponentPair::bourgain()).unwrap();
        let e = block_bound_exponents(&p, JCase::AtLeastTwo, &q(0, 1)).unwrap();
        assert_eq!(e.primary.constant, q(55, 194));
        assert_eq!(e.primary.per_inverse_a, q(0, 1));
        for a in [q(3, 2), q(2, 1), q(7, 1)] {
            assert_eq!(e.primary_offset(&a), q(55, 194));
            assert_eq!(
                e.secondary_offset(&a),
                Rational::from(2u32) / a.clone() - 1u32
            );
        }
        assert_eq!(e.secondary_exponent(&q(2, 1), &q(0, 1)), q(0, 1));
    }

    #[test]
    fn block_bound_side_conditions() {
        // l - 2k < 0 with alpha = 0 fails the j >= 2 condition
        let p = pair((1, 2), (1, 2));
        let err = block_bound_exponents(&p, JCase::AtLeastTwo, &q(0, 1)).unwrap_err();
        assert!(err.to_string().contains("alpha + l - 2k"));
        assert!(block_bound_exponents(&p, JCase::AtLeastTwo, &q(1, 2)).is_ok());
        assert!(block_bound_exponents(&p, JCase::One, &q(0, 1)).is_ok());
    }

    #[test]
    fn settled_range_examples() {
        let p = apply_word("BA", &ExponentPair::bourgain()).unwrap();
        let r = settled_alpha_range(&p).unwrap();
        assert_eq!(r.lower, q(3, 2));
        assert_eq!(r.upper, Some(q(97, 55)));
        // with l = 2k the upper end is 1/(2k)
        assert_eq!(r.upper.unwrap(), Rational::from(1u32) / (q(55, 194) * 2u32));
        // offset 2/5 > 1/3 pushes the upper end below 3/2
        let wide = pair((2, 5), (4, 5));
        assert!(settled_alpha_range(&wide).is_none());
        // offset exactly 1/3 leaves the single point a = 3/2
        let edge = settled_alpha_range(&pair((1, 3), (2, 3))).unwrap();
        assert_eq!(edge.upper, Some(q(3, 2)));
        // k = 0, l = 1/2: unbounded
        let r = settled_alpha_range(&pair((0, 1), (1, 2))).unwrap();
        assert_eq!(r.upper, None);
        assert!(settled_alpha_range(&ExponentPair::trivial()).is_none());
    }

    #[test]
    fn theta_constants_consistent() {
        use crate::asymptotics::theta_exponent;
        use crate::numeric::Exponent;
        let diff =
            theta_exponent(Exponent::Int(1), false) - theta_exponent(Exponent::Int(0), false);
        assert_eq!(diff, q(1, 2));
        assert_eq!(q(1341, 1648) - q(517, 1648), q(1, 2));
    }

    fn all_words(max_len: usize) -> Vec<Vec<Process>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for p in [Process::A, Process::B] {
                    let mut v: Vec<Process> = w.clone();
                    v.push(p);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn domain_preserved_on_short_words() {
        for seed in [ExponentPair::bourgain(), pair((0, 1), (1, 2))] {
            for w in all_words(6) {
                let mut p = seed.clone();
                for step in w.iter().rev() {
                    p = p.apply(*step);
                    ExponentPair::new(p.k().clone(), p.l().clone()).unwrap();
                }
            }
        }
    }

    fn valid_pair() -> impl Strategy<Value = ExponentPair> {
        (0i64..=500, 0i64..=500, 1i64..=1000).prop_filter_map("valid pair", |(kn, ln, den)| {
            let k = q(kn, 2 * den);
            let l = q(1, 2) + q(ln, 2 * den);
            ExponentPair::new(k, l).ok()
        })
    }

    proptest! {
        #[test]
        fn b_is_an_involution(p in valid_pair()) {
            prop_assert_eq!(apply_word("BB", &p).unwrap(), p);
        }

        #[test]
        fn processes_keep_domain(p in valid_pair()) {
            let a = p.a_process();
            prop_assert!(ExponentPair::new(a.k().clone(), a.l().clone()).is_ok());
            let b = p.b_process();
            prop_assert!(ExponentPair::new(b.k().clone(), b.l().clone()).is_ok());
        }
    }
}
