//! Independent verification of a β witness.
//!
//! Powers are rebuilt by repeated interval multiplication from the witness
//! endpoints alone; nothing from the construction is reused.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::beta::BetaWitness;
use super::dyadic::{Dyadic, Round};

/// Result of [`certify`]: `failing_m` is the first power outside its target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certification {
    pub checked: usize,
    pub failing_m: Option<usize>,
}

impl Certification {
    pub fn passed(&self) -> bool {
        self.failing_m.is_none()
    }
}

/// Outward-rounded enclosures of βᵐ for m = 1..=n.
pub fn power_enclosures<'a>(
    beta_lo: &'a Dyadic,
    beta_hi: &'a Dyadic,
    n: usize,
    prec: u32,
) -> impl Iterator<Item = (Dyadic, Dyadic)> + 'a {
    let mut acc: Option<(Dyadic, Dyadic)> = None;
    (0..n).map(move |_| {
        let next = match &acc {
            None => (beta_lo.clone(), beta_hi.clone()),
            Some((lo, hi)) => (
                lo.mul_round(beta_lo, prec, Round::Down),
                hi.mul_round(beta_hi, prec, Round::Up),
            ),
        };
        acc = Some(next.clone());
        next
    })
}

pub fn certify(w: &BetaWitness) -> Certification {
    let n = w.horizon();
    let fail = |m| Certification {
        checked: m,
        failing_m: Some(m),
    };
    let one = Dyadic::from_int(1);
    if w.beta_lo <= one || w.beta_lo > w.beta_hi || w.integer_parts.len() != n {
        return fail(1.min(n));
    }
    for (i, (lo, hi)) in power_enclosures(&w.beta_lo, &w.beta_hi, n, w.precision_bits).enumerate() {
        let int = BigRational::from_integer(w.integer_parts[i].clone());
        let target = &w.targets[i];
        let inside = lo.cmp_rational(&(&int + target.lo())) != Ordering::Less
            && hi.cmp_rational(&(&int + target.hi())) != Ordering::Greater;
        if !inside {
            return fail(i + 1);
        }
    }
    Certification {
        checked: n,
        failing_m: None,
    }
}

/// Integer part and fractional enclosure of [lo, hi] when both ends share
/// an integer part.
pub fn fractional_enclosure(lo: &Dyadic, hi: &Dyadic) -> Option<(BigInt, BigRational, BigRational)> {
    let k = lo.floor();
    if hi.floor() != k && hi.cmp_rational(&BigRational::from_integer(&k + 1)) == Ordering::Greater {
        return None;
    }
    let kq = BigRational::from_integer(k.clone());
    Some((k, lo.to_rational() - &kq, hi.to_rational() - kq))
}
