//! Assigned-frequency tables: finite lists and lazily generated countable
//! alphabets.

use std::fmt;
use std::sync::Arc;

use crate::error::SpecError;
use crate::scalar::Scalar;

/// Number of leading terms of a lazy spec checked at construction.
pub const LAZY_VALIDATION_TERMS: usize = 64;

/// A countable alphabet whose frequencies are produced on demand.
///
/// Indices are 1-based. `tail(j)` must equal `Σ_{i>j} weight(i)` in closed
/// form, so `tail(0) = 1`.
pub trait LazyWeights<S>: Send + Sync + fmt::Debug {
    fn weight(&self, index: usize) -> S;
    fn tail(&self, after: usize) -> S;
}

#[derive(Clone, Debug)]
enum Weights<S> {
    Finite {
        lambdas: Vec<S>,
        // tails[j] = Σ_{i>j} λ(a_i), j = 0..=p
        tails: Vec<S>,
        labels: Vec<usize>,
    },
    Lazy(Arc<dyn LazyWeights<S>>),
}

/// Validated assigned frequencies in nonincreasing internal order.
#[derive(Clone, Debug)]
pub struct FrequencySpec<S> {
    weights: Weights<S>,
}

impl<S: Scalar> FrequencySpec<S> {
    /// Builds a finite spec. The input is stably sorted into nonincreasing
    /// order; [`label`](Self::label) maps internal indices back to the
    /// caller's 1-based positions.
    pub fn finite(raw: Vec<S>) -> Result<Self, SpecError> {
        if raw.is_empty() {
            return Err(SpecError::Empty);
        }
        if let Some(pos) = raw.iter().position(|w| !w.is_positive()) {
            return Err(SpecError::NonPositiveWeight { index: pos + 1 });
        }
        let sum = raw.iter().fold(S::zero(), |acc, w| acc + w.clone());
        let residual = S::one() - sum;
        if !S::sum_residual_ok(&residual) {
            return Err(SpecError::SumNotOne {
                residual: residual.render(),
            });
        }

        let mut order: Vec<usize> = (0..raw.len()).collect();
        // stable: equal weights keep their input order
        order.sort_by(|&a, &b| {
            raw[b]
                .partial_cmp(&raw[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let lambdas: Vec<S> = order.iter().map(|&i| raw[i].clone()).collect();
        let labels: Vec<usize> = order.iter().map(|&i| i + 1).collect();

        let mut tails = vec![S::zero(); lambdas.len() + 1];
        for j in (0..lambdas.len()).rev() {
            tails[j] = tails[j + 1].clone() + lambdas[j].clone();
        }
        Ok(Self {
            weights: Weights::Finite {
                lambdas,
                tails,
                labels,
            },
        })
    }

    /// Wraps a lazy generator after checking its first
    /// [`LAZY_VALIDATION_TERMS`] terms.
    pub fn lazy(source: Arc<dyn LazyWeights<S>>) -> Result<Self, SpecError> {
        let head = source.tail(0);
        if !S::approx_eq(&head, &S::one()) {
            return Err(SpecError::SumNotOne {
                residual: (S::one() - head).render(),
            });
        }
        let mut prev: Option<S> = None;
        for j in 1..=LAZY_VALIDATION_TERMS {
            let w = source.weight(j);
            if !w.is_positive() {
                return Err(SpecError::NonPositiveWeight { index: j });
            }
            if let Some(p) = &prev {
                if w > *p {
                    return Err(SpecError::NotNonincreasing { index: j });
                }
            }
            let expected = source.tail(j - 1) - w.clone();
            if !S::approx_eq(&expected, &source.tail(j)) {
                return Err(SpecError::TailMismatch { index: j });
            }
            prev = Some(w);
        }
        Ok(Self {
            weights: Weights::Lazy(source),
        })
    }

    /// Alphabet size, `None` for countable alphabets. Never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match &self.weights {
            Weights::Finite { lambdas, .. } => Some(lambdas.len()),
            Weights::Lazy(_) => None,
        }
    }

    pub fn is_lazy(&self) -> bool {
        matches!(self.weights, Weights::Lazy(_))
    }

    /// Whether `index` names a letter of the alphabet (index ≥ 1).
    pub fn contains(&self, index: usize) -> bool {
        index >= 1 && self.len().is_none_or(|p| index <= p)
    }

    /// λ(a_index) for a 1-based internal index, `None` past a finite alphabet.
    pub fn weight(&self, index: usize) -> Option<S> {
        if index == 0 {
            return Some(S::zero());
        }
        match &self.weights {
            Weights::Finite { lambdas, .. } => lambdas.get(index - 1).cloned(),
            Weights::Lazy(src) => Some(src.weight(index)),
        }
    }

    /// Σ_{i>j} λ(a_i).
    pub fn tail(&self, after: usize) -> S {
        match &self.weights {
            Weights::Finite { tails, .. } => tails.get(after).cloned().unwrap_or_else(S::zero),
            Weights::Lazy(src) => src.tail(after),
        }
    }

    /// The caller's 1-based label for an internal index. Lazy specs and the
    /// Joker map to themselves.
    pub fn label(&self, index: usize) -> usize {
        match &self.weights {
            Weights::Finite { labels, .. } if index >= 1 => labels[index - 1],
            _ => index,
        }
    }

    /// Inverse of [`label`](Self::label).
    pub fn index_of_label(&self, label: usize) -> Option<usize> {
        match &self.weights {
            Weights::Finite { labels, .. } => {
                if label == 0 {
                    Some(0)
                } else {
                    labels.iter().position(|&l| l == label).map(|i| i + 1)
                }
            }
            Weights::Lazy(_) => Some(label),
        }
    }

    /// Permutation record: entry `i` is the input position of internal letter `i+1`.
    pub fn permutation(&self) -> Vec<usize> {
        match &self.weights {
            Weights::Finite { labels, .. } => labels.clone(),
            Weights::Lazy(_) => Vec::new(),
        }
    }

    pub fn mode(&self) -> crate::Mode {
        S::MODE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sorts_and_records_permutation() {
        let spec = FrequencySpec::finite(vec![0.3, 0.5, 0.2]).unwrap();
        assert_eq!(spec.weight(1), Some(0.5));
        assert_eq!(spec.weight(2), Some(0.3));
        assert_eq!(spec.weight(3), Some(0.2));
        assert_eq!(spec.permutation(), vec![2, 1, 3]);
        assert_eq!(spec.label(1), 2);
        assert_eq!(spec.index_of_label(2), Some(1));
        assert_eq!(spec.weight(4), None);
    }

    #[test]
    fn ties_keep_input_order() {
        let spec = FrequencySpec::finite(vec![q(1, 4), q(1, 2), q(1, 4)]).unwrap();
        assert_eq!(spec.permutation(), vec![2, 1, 3]);
    }

    #[test]
    fn sum_residual_is_reported_exactly() {
        let err = FrequencySpec::finite(vec![q(1, 2), q(1, 3)]).unwrap_err();
        assert_eq!(
            err,
            SpecError::SumNotOne {
                residual: "1/6".into()
            }
        );
    }

    #[test]
    fn rejects_nonpositive() {
        let err = FrequencySpec::finite(vec![q(1, 1), q(0, 1)]).unwrap_err();
        assert_eq!(err, SpecError::NonPositiveWeight { index: 2 });
        assert_eq!(
            FrequencySpec::<f64>::finite(vec![]).unwrap_err(),
            SpecError::Empty
        );
    }

    #[test]
    fn float_sum_tolerance() {
        assert!(FrequencySpec::finite(vec![0.1; 10]).is_ok());
        assert!(FrequencySpec::finite(vec![0.5, 0.4999999]).is_err());
    }

    #[test]
    fn finite_tail() {
        let spec = FrequencySpec::finite(vec![q(1, 2), q(1, 3), q(1, 6)]).unwrap();
        assert_eq!(spec.tail(0), q(1, 1));
        assert_eq!(spec.tail(1), q(1, 2));
        assert_eq!(spec.tail(3), q(0, 1));
        assert_eq!(spec.tail(7), q(0, 1));
    }

    #[derive(Debug)]
    struct Increasing;
    impl LazyWeights<f64> for Increasing {
        fn weight(&self, index: usize) -> f64 {
            if index == 2 {
                0.6
            } else {
                0.5f64.powi(index as i32)
            }
        }
        fn tail(&self, after: usize) -> f64 {
            0.5f64.powi(after as i32)
        }
    }

    #[derive(Debug)]
    struct BadTail;
    impl LazyWeights<f64> for BadTail {
        fn weight(&self, index: usize) -> f64 {
            0.5f64.powi(index as i32)
        }
        fn tail(&self, after: usize) -> f64 {
            if after == 0 {
                1.0
            } else {
                0.25f64.powi(after as i32)
            }
        }
    }

    #[test]
    fn lazy_validation_errors() {
        assert_eq!(
            FrequencySpec::lazy(Arc::new(Increasing)).unwrap_err(),
            SpecError::NotNonincreasing { index: 2 }
        );
        assert_eq!(
            FrequencySpec::lazy(Arc::new(BadTail)).unwrap_err(),
            SpecError::TailMismatch { index: 1 }
        );
    }
}
