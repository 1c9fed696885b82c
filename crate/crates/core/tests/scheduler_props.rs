use std::sync::Arc;

use demseq_core::diagnostics::{audit_run, ledger_at, LedgerSampling};
use demseq_core::numeration::{geometric_spec, BaseSpec};
use demseq_core::{generate, FrequencySpec, LetterId, Rational, SchedulerState, Scalar};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Integer weights normalized to sum 1, in the caller's order.
fn normalize(raw: &[u32]) -> Vec<Rational> {
    let total: u64 = raw.iter().map(|&w| w as u64).sum();
    raw.iter().map(|&w| q(w as i64, total as i64)).collect()
}

fn weights() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..50, 1..7)
}

/// Straight from the definition: sort λ nonincreasing, then at each step
/// recompute every λ - c/M as a fresh rational and take the first maximum.
fn naive_oracle(lambdas: &[Rational], n: usize) -> Vec<usize> {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    let mut counts = vec![0i64; sorted.len()];
    let mut out = Vec::new();
    for m in 0..n {
        let pick = if m == 0 {
            0
        } else {
            let d: Vec<Rational> = sorted
                .iter()
                .zip(&counts)
                .map(|(l, &c)| l - q(c, m as i64))
                .collect();
            let max = d.iter().max().unwrap().clone();
            if max.is_positive() {
                d.iter().position(|x| *x == max).unwrap()
            } else {
                0
            }
        };
        counts[pick] += 1;
        out.push(pick + 1);
    }
    out
}

fn indices<S: Scalar>(seq: &demseq_core::Sequence<S>) -> Vec<usize> {
    seq.letters().iter().map(|l| l.index()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_run_matches_naive_oracle(raw in weights(), n in 1usize..300) {
        let w = normalize(&raw);
        let spec = FrequencySpec::finite(w.clone()).unwrap();
        let seq = generate(&spec, &[], n).unwrap();
        prop_assert_eq!(indices(&seq), naive_oracle(&w, n));
        prop_assert!(seq.replays());
    }

    #[test]
    fn runs_are_deterministic(raw in weights(), n in 1usize..500) {
        let w = normalize(&raw);
        let exact = FrequencySpec::finite(w.clone()).unwrap();
        prop_assert_eq!(
            indices(&generate(&exact, &[], n).unwrap()),
            indices(&generate(&exact, &[], n).unwrap())
        );
        let float = FrequencySpec::<f64>::finite(w.iter().map(f64::from_rational).collect()).unwrap();
        prop_assert_eq!(
            indices(&generate(&float, &[], n).unwrap()),
            indices(&generate(&float, &[], n).unwrap())
        );
    }

    /// Where every decision of the exact run is separated by more than 2^-30,
    /// the float run is identical.
    #[test]
    fn float_agrees_when_gaps_are_wide(raw in weights(), n in 1usize..400) {
        let w = normalize(&raw);
        let exact = FrequencySpec::finite(w.clone()).unwrap();
        let gap = Rational::new(1.into(), (1i64 << 30).into());
        let mut state = SchedulerState::new(exact.clone());
        let mut wide = true;
        for _ in 0..n {
            if state.steps() > 0 {
                let mut d: Vec<Rational> = (1..state.frontier())
                    .chain(state.frontier_letter().map(|l| l.index()))
                    .map(|i| state.deficit(LetterId::new(i)).unwrap())
                    .collect();
                d.sort_by(|a, b| b.cmp(a));
                if d[0].abs() <= gap || (d.len() > 1 && &d[0] - &d[1] <= gap) {
                    wide = false;
                }
            }
            state.step();
        }
        let float = FrequencySpec::<f64>::finite(w.iter().map(f64::from_rational).collect()).unwrap();
        let same = indices(&generate(&exact, &[], n).unwrap()) == indices(&generate(&float, &[], n).unwrap());
        prop_assert!(!wide || same);
    }

    /// Count conservation, |ΔD| ≤ 1/(M+1), D ≤ λ with equality iff unseen,
    /// selection soundness and the balanced ledger, at every step.
    #[test]
    fn audit_is_clean(raw in weights(), n in 1usize..400, joker in any::<bool>()) {
        let spec = FrequencySpec::finite(normalize(&raw)).unwrap();
        let prefix: Vec<LetterId> = if joker { vec![LetterId::JOKER] } else { vec![] };
        let n = n.max(prefix.len());
        let report = audit_run(&spec, &prefix, n, LedgerSampling::EveryStep).unwrap();
        prop_assert!(report.clean(), "{:?}", report);
        prop_assert_eq!(report.ledgers_checked, n as u64);
    }

    #[test]
    fn every_letter_appears_within_four_over_min_lambda(raw in weights()) {
        let w = normalize(&raw);
        let min = w.iter().min().unwrap().clone();
        let bound = (Rational::from_integer(4.into()) / min).ceil().to_integer();
        let n: usize = bound.try_into().unwrap();
        let spec = FrequencySpec::finite(w.clone()).unwrap();
        let seq = generate(&spec, &[], n).unwrap();
        for i in 1..=w.len() {
            prop_assert!(seq.letters().iter().any(|l| l.index() == i), "letter {} missing", i);
        }
    }

    #[test]
    fn arbitrary_prefix_keeps_invariants(raw in weights(), prefix in prop::collection::vec(0usize..7, 0..12), extra in 1usize..200) {
        let spec = FrequencySpec::finite(normalize(&raw)).unwrap();
        let len = raw.len();
        let prefix: Vec<LetterId> = prefix.into_iter().map(|i| LetterId::new(i.min(len))).collect();
        let n = prefix.len() + extra;
        let seq = generate(&spec, &prefix, n).unwrap();
        prop_assert_eq!(&seq.letters()[..prefix.len()], prefix.as_slice());
        prop_assert!(seq.replays());
        let report = audit_run(&spec, &prefix, n, LedgerSampling::EveryStep).unwrap();
        prop_assert!(report.clean(), "{:?}", report);
    }

    /// Lazy geometric specs: unmaterialized letters never beat the frontier
    /// letter, and the ledger balances with the tail folded in.
    #[test]
    fn geometric_frontier_dominance(b in 2u64..12, n in 1usize..400) {
        let spec = geometric_spec::<Rational>(BaseSpec::new(b).unwrap()).unwrap();
        let mut state = SchedulerState::with_prefix(spec.clone(), &[LetterId::JOKER]).unwrap();
        for _ in 0..n {
            let f = state.frontier_letter().unwrap();
            let df = state.deficit(f).unwrap();
            for j in f.index() + 1..f.index() + 4 {
                let dj = state.deficit(LetterId::new(j)).unwrap();
                prop_assert_eq!(dj.clone(), spec.weight(j).unwrap());
                prop_assert!(dj <= df);
            }
            let ledger = ledger_at(&state).unwrap();
            prop_assert!(ledger.residual.is_zero());
            state.step();
        }
    }
}

#[test]
fn seeded_ties_only_pick_most_late_letters() {
    let spec = FrequencySpec::finite(vec![q(1, 4); 4]).unwrap();
    let mut state = SchedulerState::new(spec.clone()).with_seeded_ties(7);
    for _ in 0..400 {
        let before = state.clone();
        let pick = state.step();
        if before.steps() > 0 {
            let d = before.deficit(pick).unwrap();
            for i in 1..=4 {
                assert!(before.deficit(LetterId::new(i)).unwrap() <= d);
            }
        }
    }
    for i in 1..=4 {
        assert_eq!(state.count(LetterId::new(i)), 100);
    }
}

#[test]
fn lazy_dyadic_spec_runs() {
    #[derive(Debug)]
    struct Halves;
    impl demseq_core::LazyWeights<Rational> for Halves {
        fn weight(&self, i: usize) -> Rational {
            Rational::new(1.into(), num_bigint::BigInt::from(2).pow(i as u32))
        }
        fn tail(&self, after: usize) -> Rational {
            Rational::new(1.into(), num_bigint::BigInt::from(2).pow(after as u32))
        }
    }
    let spec = FrequencySpec::lazy(Arc::new(Halves)).unwrap();
    assert_eq!(spec.tail(0), Rational::one());
    let seq = generate(&spec, &[], 64).unwrap();
    assert!(seq.replays());
}
