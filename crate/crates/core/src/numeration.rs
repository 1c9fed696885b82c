//! Integer-base numeration: which digit grows when a base-b counter ticks.
//!
//! Three generators are compared: the democratic sequence over geometric
//! frequencies started with a Joker, a literal digit counter, and the fixed
//! point of `a_k ↦ a₁^(b-1) a_{k+1}` behind a Joker. The last two always
//! agree. The democratic word agrees with them for b = 2 only; for b ≥ 3 the
//! max-deficit rule emits a₂ as soon as λ(a₁) - λ_M(a₁) drops below λ(a₂),
//! well before the counter's first carry.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::error::NumerationError;
use crate::scalar::Scalar;
use crate::scheduler::{generate, LetterId, Sequence};
use crate::spec::{FrequencySpec, LazyWeights};

/// An integer base b ≥ 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BaseSpec(u64);

impl BaseSpec {
    pub fn new(b: u64) -> Result<Self, NumerationError> {
        if b < 2 {
            return Err(NumerationError::BaseTooSmall(b));
        }
        Ok(BaseSpec(b))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// λ(a_n) = (1 - 1/b)·b^(1-n), tail(j) = b^(-j).
#[derive(Debug, Clone, Copy)]
pub struct Geometric {
    base: u64,
}

impl Geometric {
    pub fn new(base: BaseSpec) -> Self {
        Geometric { base: base.get() }
    }
}

impl LazyWeights<BigRational> for Geometric {
    fn weight(&self, index: usize) -> BigRational {
        let b = BigInt::from(self.base);
        BigRational::new(&b - 1u32, Pow::pow(&b, index as u32))
    }

    fn tail(&self, after: usize) -> BigRational {
        BigRational::new(BigInt::one(), Pow::pow(BigInt::from(self.base), after as u32))
    }
}

impl LazyWeights<f64> for Geometric {
    fn weight(&self, index: usize) -> f64 {
        let b = self.base as f64;
        (1.0 - 1.0 / b) * b.powi(1 - index as i32)
    }

    fn tail(&self, after: usize) -> f64 {
        (self.base as f64).powi(-(after as i32))
    }
}

/// Lazy geometric spec for base `b`.
pub fn geometric_spec<S: Scalar>(b: BaseSpec) -> Result<FrequencySpec<S>, NumerationError>
where
    Geometric: LazyWeights<S>,
{
    Ok(FrequencySpec::lazy(Arc::new(Geometric::new(b)))?)
}

/// The one-step substitution `a_k ↦ a₁^(b-1) a_{k+1}`.
#[derive(Clone, Copy, Debug)]
pub struct SubstitutionRule {
    base: BaseSpec,
}

impl SubstitutionRule {
    pub fn new(base: BaseSpec) -> Self {
        SubstitutionRule { base }
    }

    pub fn image(&self, letter: LetterId) -> Vec<LetterId> {
        let b = self.base.get() as usize;
        let mut out = vec![LetterId::new(1); b - 1];
        out.push(LetterId::new(letter.index() + 1));
        out
    }
}

/// u₁ = J; for N ≥ 2, u_N is the 1-based position of the digit that grows on
/// the counter transition (N-2) → (N-1). Simulated on a literal digit array.
pub fn counter_increments(b: BaseSpec, n: usize) -> Vec<LetterId> {
    let base = b.get();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(LetterId::JOKER);
    // little-endian digits of the counter, starting at 0 (no digits)
    let mut digits: Vec<u64> = Vec::new();
    while out.len() < n {
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                digits.push(1);
                break;
            }
            if digits[pos] + 1 < base {
                digits[pos] += 1;
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
        out.push(LetterId::new(pos + 1));
    }
    out
}

/// First `n` letters of the fixed point of σ seeded with a₁.
///
/// The word is expanded in place: letter `i` of the fixed point determines
/// block `i` of its own image, so only letters already produced are read.
pub fn substitution_fixed_point(b: BaseSpec, n: usize) -> Vec<LetterId> {
    let rule = SubstitutionRule::new(b);
    let mut word: Vec<LetterId> = Vec::with_capacity(n + b.get() as usize);
    if n == 0 {
        return word;
    }
    word.extend(rule.image(LetterId::new(1)));
    let mut cursor = 1;
    while word.len() < n {
        let letter = word[cursor];
        word.extend(rule.image(letter));
        cursor += 1;
    }
    word.truncate(n);
    word
}

/// Democratic sequence over the geometric spec started with a Joker.
pub fn democratic_numeration<S: Scalar>(
    b: BaseSpec,
    n: usize,
) -> Result<Sequence<S>, NumerationError>
where
    Geometric: LazyWeights<S>,
{
    let spec = geometric_spec::<S>(b)?;
    let prefix: &[LetterId] = if n == 0 { &[] } else { &[LetterId::JOKER] };
    Ok(generate(&spec, prefix, n)?)
}

/// Outcome of the three-way comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equal {
        n: usize,
    },
    Mismatch {
        /// 1-based position of the first disagreement.
        at: usize,
        democratic: LetterId,
        counter: LetterId,
        substitution: LetterId,
    },
}

impl Equivalence {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equivalence::Equal { .. })
    }
}

impl fmt::Display for Equivalence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Equivalence::Equal { n } => write!(f, "EQUAL n={n}"),
            Equivalence::Mismatch {
                at,
                democratic,
                counter,
                substitution,
            } => write!(
                f,
                "MISMATCH at n={at}: dem={} counter={} subst={}",
                democratic.index(),
                counter.index(),
                substitution.index()
            ),
        }
    }
}

/// Compares the three position-by-position.
pub fn compare_words(dem: &[LetterId], counter: &[LetterId], subst: &[LetterId]) -> Equivalence {
    let n = dem.len().min(counter.len()).min(subst.len());
    for i in 0..n {
        if dem[i] != counter[i] || dem[i] != subst[i] {
            return Equivalence::Mismatch {
                at: i + 1,
                democratic: dem[i],
                counter: counter[i],
                substitution: subst[i],
            };
        }
    }
    Equivalence::Equal { n }
}

/// Builds the democratic, counter and Joker-prefixed substitution words of
/// length `n` and reports the first disagreement.
pub fn verify_equivalence<S: Scalar>(b: BaseSpec, n: usize) -> Result<Equivalence, NumerationError>
where
    Geometric: LazyWeights<S>,
{
    let dem = democratic_numeration::<S>(b, n)?;
    let counter = counter_increments(b, n);
    let mut subst = Vec::with_capacity(n);
    if n > 0 {
        subst.push(LetterId::JOKER);
        subst.extend(substitution_fixed_point(b, n - 1));
    }
    Ok(compare_words(dem.letters(), &counter, &subst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &[usize]) -> Vec<LetterId> {
        s.iter().copied().map(LetterId::new).collect()
    }

    fn displayed_prefix() -> Vec<LetterId> {
        let mut w = vec![0];
        w.extend([1; 9]);
        w.push(2);
        w.extend([1; 9]);
        w.push(2);
        w.push(1);
        word(&w)
    }

    #[test]
    fn geometric_weights() {
        let ten = BaseSpec::new(10).unwrap();
        let spec = geometric_spec::<BigRational>(ten).unwrap();
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(spec.weight(1), Some(q(9, 10)));
        assert_eq!(spec.weight(2), Some(q(9, 100)));
        assert_eq!(spec.weight(3), Some(q(9, 1000)));
        assert_eq!(spec.tail(1), q(1, 10));

        let two = geometric_spec::<f64>(BaseSpec::new(2).unwrap()).unwrap();
        assert_eq!(two.weight(1), Some(0.5));
        assert_eq!(two.weight(3), Some(0.125));
    }

    #[test]
    fn base_too_small() {
        assert_eq!(BaseSpec::new(1), Err(NumerationError::BaseTooSmall(1)));
        assert_eq!(BaseSpec::new(0), Err(NumerationError::BaseTooSmall(0)));
    }

    #[test]
    fn counter_examples() {
        let ten = BaseSpec::new(10).unwrap();
        assert_eq!(counter_increments(ten, 22), displayed_prefix());
        let two = BaseSpec::new(2).unwrap();
        assert_eq!(counter_increments(two, 9), word(&[0, 1, 2, 1, 3, 1, 2, 1, 4]));
        assert_eq!(counter_increments(BaseSpec::new(7).unwrap(), 2), word(&[0, 1]));
    }

    #[test]
    fn substitution_examples() {
        let ten = BaseSpec::new(10).unwrap();
        let mut expected = vec![1; 9];
        expected.extend([2, 1]);
        assert_eq!(substitution_fixed_point(ten, 11), word(&expected));
        let two = BaseSpec::new(2).unwrap();
        assert_eq!(substitution_fixed_point(two, 8), word(&[1, 2, 1, 3, 1, 2, 1, 4]));
        assert_eq!(substitution_fixed_point(BaseSpec::new(5).unwrap(), 1), word(&[1]));
    }

    #[test]
    fn substitution_is_a_fixed_point() {
        let b = BaseSpec::new(3).unwrap();
        let rule = SubstitutionRule::new(b);
        let w = substitution_fixed_point(b, 300);
        let image: Vec<LetterId> = w[..100].iter().flat_map(|&l| rule.image(l)).collect();
        assert_eq!(&image[..300], &w[..]);
        for l in &w {
            assert_eq!(rule.image(*l).len(), 3);
        }
    }

    #[test]
    fn democratic_base_ten_prefix() {
        let ten = BaseSpec::new(10).unwrap();
        let seq = democratic_numeration::<BigRational>(ten, 22).unwrap();
        // after J a₁⁵: D(a₁) = 9/10 - 5/6 = 1/15 < 9/100 = D(a₂)
        let expected = word(&[0, 1, 1, 1, 1, 1, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 1, 1, 1, 1, 1]);
        assert_eq!(seq.letters(), expected.as_slice());
        assert_ne!(seq.letters(), displayed_prefix().as_slice());
    }

    #[test]
    fn equivalence_small_bases() {
        let two = BaseSpec::new(2).unwrap();
        assert_eq!(
            verify_equivalence::<BigRational>(two, 3000).unwrap(),
            Equivalence::Equal { n: 3000 }
        );
        for (b, at) in [(3, 3), (5, 4), (10, 7)] {
            let base = BaseSpec::new(b).unwrap();
            match verify_equivalence::<BigRational>(base, 3000).unwrap() {
                Equivalence::Mismatch {
                    at: got,
                    democratic,
                    counter,
                    substitution,
                } => {
                    assert_eq!(got, at, "b={b}");
                    assert_eq!(democratic.index(), 2);
                    assert_eq!(counter.index(), 1);
                    assert_eq!(substitution, counter);
                }
                other => panic!("b={b}: {other}"),
            }
        }
    }

    #[test]
    fn counter_letter_counts_track_geometric_frequencies() {
        for b in [2u64, 3, 10] {
            let n = 5000;
            let w = counter_increments(BaseSpec::new(b).unwrap(), n);
            for i in 1..8usize {
                let count = w.iter().filter(|l| l.index() == i).count() as f64;
                let expected =
                    n as f64 * (1.0 - 1.0 / b as f64) * (b as f64).powi(-(i as i32 - 1));
                assert!((count - expected).abs() <= 2.0, "b={b} i={i}");
            }
        }
    }

    #[test]
    fn mismatch_report_format() {
        let e = compare_words(&word(&[0, 1, 2]), &word(&[0, 1, 1]), &word(&[0, 1, 2]));
        assert_eq!(e.to_string(), "MISMATCH at n=3: dem=2 counter=1 subst=2");
        assert_eq!(Equivalence::Equal { n: 5 }.to_string(), "EQUAL n=5");
    }
}
