//! The greedy max-deficit scheduler.
//!
//! At each step the letter lagging furthest behind its assigned frequency is
//! emitted; ties go to the lowest index, and when nobody is late the first
//! letter is emitted. Countable alphabets are handled through a frontier:
//! letters below it are scanned every step, and the frontier letter stands in
//! for the whole unmaterialized tail since its frequency dominates every
//! letter beyond it.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ScheduleError;
use crate::scalar::Scalar;
use crate::spec::FrequencySpec;

/// A letter of the alphabet by internal index. Index 0 is the Joker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LetterId(usize);

impl LetterId {
    pub const JOKER: LetterId = LetterId(0);

    pub const fn new(index: usize) -> Self {
        LetterId(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }

    pub const fn is_joker(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for LetterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_joker() {
            f.write_str("J")
        } else {
            write!(f, "a{}", self.0)
        }
    }
}

/// Mutable scheduler state: step counter, per-letter counts and the
/// materialization frontier.
#[derive(Clone, Debug)]
pub struct SchedulerState<S> {
    spec: FrequencySpec<S>,
    steps: u64,
    // counts[i] for i < frontier; counts[0] is the Joker
    counts: Vec<u64>,
    // lambdas[i] for i <= frontier when the frontier letter exists
    lambdas: Vec<S>,
    tie_rng: Option<ChaCha8Rng>,
}

impl<S: Scalar> SchedulerState<S> {
    pub fn new(spec: FrequencySpec<S>) -> Self {
        let mut lambdas = vec![S::zero()];
        if let Some(l) = spec.weight(1) {
            lambdas.push(l);
        }
        Self {
            spec,
            steps: 0,
            counts: vec![0],
            lambdas,
            tie_rng: None,
        }
    }

    /// Starts from an arbitrary prefix (Joker allowed).
    pub fn with_prefix(spec: FrequencySpec<S>, prefix: &[LetterId]) -> Result<Self, ScheduleError> {
        let mut state = Self::new(spec);
        for &letter in prefix {
            state.push(letter)?;
        }
        Ok(state)
    }

    /// Breaks ties among the most-late letters at random instead of by
    /// lowest index. Only materialized letters and the frontier letter take
    /// part in the draw.
    pub fn with_seeded_ties(mut self, seed: u64) -> Self {
        self.tie_rng = Some(ChaCha8Rng::seed_from_u64(seed));
        self
    }

    pub fn spec(&self) -> &FrequencySpec<S> {
        &self.spec
    }

    /// Number of terms emitted so far, prefix included.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Smallest letter index not yet materialized.
    pub fn frontier(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, letter: LetterId) -> u64 {
        self.counts.get(letter.index()).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// λ for materialized letters and the frontier letter.
    pub fn lambda(&self, letter: LetterId) -> Option<S> {
        match self.lambdas.get(letter.index()) {
            Some(l) => Some(l.clone()),
            None => self.spec.weight(letter.index()),
        }
    }

    /// The frontier letter, if the alphabet has one past the active set.
    pub fn frontier_letter(&self) -> Option<LetterId> {
        let f = self.frontier();
        (self.lambdas.len() > f).then_some(LetterId(f))
    }

    /// Signed deficit `λ(a) - count(a)/M`; negative values are excesses.
    pub fn deficit(&self, letter: LetterId) -> Result<S, ScheduleError> {
        if self.steps == 0 {
            return Err(ScheduleError::ZeroSteps);
        }
        let lambda = self
            .lambda(letter)
            .ok_or(ScheduleError::UnknownLetter {
                index: letter.index(),
            })?;
        Ok(S::deficit(&lambda, self.count(letter), self.steps))
    }

    /// Letter the deterministic rule would emit next.
    pub fn select_next(&self) -> LetterId {
        LetterId(self.scan(None))
    }

    /// Emits one letter and updates the state.
    pub fn step(&mut self) -> LetterId {
        let chosen = if self.tie_rng.is_some() {
            let mut ties = Vec::new();
            let best = self.scan(Some(&mut ties));
            match (&mut self.tie_rng, ties.len() > 1) {
                (Some(rng), true) => *ties.choose(rng).expect("nonempty"),
                _ => best,
            }
        } else {
            self.scan(None)
        };
        let letter = LetterId(chosen);
        self.record(letter);
        letter
    }

    /// Appends a letter verbatim, bypassing the selection rule.
    pub fn push(&mut self, letter: LetterId) -> Result<(), ScheduleError> {
        let idx = letter.index();
        if idx != 0 && !self.spec.contains(idx) {
            return Err(ScheduleError::InvalidPrefixLetter { index: idx });
        }
        while self.frontier() < idx {
            self.advance_frontier();
        }
        self.record(letter);
        Ok(())
    }

    fn advance_frontier(&mut self) {
        self.counts.push(0);
        let next = self.counts.len();
        if self.lambdas.len() == next {
            if let Some(l) = self.spec.weight(next) {
                self.lambdas.push(l);
            }
        }
    }

    fn record(&mut self, letter: LetterId) {
        let idx = letter.index();
        if idx == self.frontier() {
            self.advance_frontier();
        }
        self.counts[idx] += 1;
        self.steps += 1;
    }

    /// Index of the most-late letter. When `ties` is given it receives every
    /// letter sharing the maximal positive deficit.
    fn scan(&self, ties: Option<&mut Vec<usize>>) -> usize {
        if self.steps == 0 {
            // deficits are undefined; the key is λ itself, maximal at a₁
            return 1;
        }
        let m = self.steps;
        let count_of = |i: usize| self.counts.get(i).copied().unwrap_or(0);
        let mut best = 1;
        for i in 2..self.lambdas.len() {
            let ord = S::cmp_deficits(
                &self.lambdas[i],
                count_of(i),
                &self.lambdas[best],
                count_of(best),
                m,
            );
            if ord == std::cmp::Ordering::Greater {
                best = i;
            }
        }
        if !S::deficit_positive(&self.lambdas[best], count_of(best), m) {
            return 1;
        }
        if let Some(ties) = ties {
            ties.clear();
            for i in 1..self.lambdas.len() {
                let ord = S::cmp_deficits(
                    &self.lambdas[i],
                    count_of(i),
                    &self.lambdas[best],
                    count_of(best),
                    m,
                );
                if ord == std::cmp::Ordering::Equal {
                    ties.push(i);
                }
            }
        }
        best
    }
}

/// An emitted sequence u₁…u_N together with the spec that produced it.
#[derive(Clone, Debug)]
pub struct Sequence<S> {
    letters: Vec<LetterId>,
    spec: FrequencySpec<S>,
    prefix_len: usize,
}

impl<S: Scalar> Sequence<S> {
    pub fn from_parts(letters: Vec<LetterId>, spec: FrequencySpec<S>, prefix_len: usize) -> Self {
        Self {
            letters,
            spec,
            prefix_len,
        }
    }

    pub fn letters(&self) -> &[LetterId] {
        &self.letters
    }

    pub fn spec(&self) -> &FrequencySpec<S> {
        &self.spec
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letters translated back to the caller's labels (Joker stays 0).
    pub fn labels(&self) -> Vec<usize> {
        self.letters
            .iter()
            .map(|l| self.spec.label(l.index()))
            .collect()
    }

    /// Checks that every term past the prefix is what the selection rule
    /// picks from the preceding state.
    pub fn replays(&self) -> bool {
        let mut state = SchedulerState::new(self.spec.clone());
        for (n, &letter) in self.letters.iter().enumerate() {
            if n < self.prefix_len {
                if state.push(letter).is_err() {
                    return false;
                }
            } else if state.step() != letter {
                return false;
            }
        }
        true
    }
}

/// Generates `n` terms: the prefix verbatim, then the selection rule.
pub fn generate<S: Scalar>(
    spec: &FrequencySpec<S>,
    prefix: &[LetterId],
    n: usize,
) -> Result<Sequence<S>, ScheduleError> {
    if prefix.len() > n {
        return Err(ScheduleError::PrefixTooLong {
            prefix: prefix.len(),
            n,
        });
    }
    let mut state = SchedulerState::with_prefix(spec.clone(), prefix)?;
    let mut letters = Vec::with_capacity(n);
    letters.extend_from_slice(prefix);
    while letters.len() < n {
        letters.push(state.step());
    }
    Ok(Sequence::from_parts(letters, spec.clone(), prefix.len()))
}
