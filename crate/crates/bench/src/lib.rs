//! Shared fixtures for the criterion benches.

use demseq_core::numeration::{geometric_spec, BaseSpec};
use demseq_core::{FrequencySpec, Rational, Scalar};

pub fn quarters<S: Scalar>() -> FrequencySpec<S> {
    let w = [(2, 5), (3, 10), (1, 5), (1, 10)]
        .iter()
        .map(|&(p, q)| S::from_ratio(p, q))
        .collect();
    FrequencySpec::finite(w).expect("valid spec")
}

pub fn geometric<S: Scalar>(b: u64) -> FrequencySpec<S>
where
    demseq_core::numeration::Geometric: demseq_core::LazyWeights<S>,
{
    geometric_spec::<S>(BaseSpec::new(b).expect("base >= 2")).expect("valid spec")
}

pub fn exact_quarters() -> FrequencySpec<Rational> {
    quarters()
}
