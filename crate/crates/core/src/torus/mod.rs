//! Torus pipeline: partition, democratic cell plan, certified β whose
//! powers follow the plan, and the resulting empirical cell frequencies.

pub mod beta;
pub mod certify;
pub mod dyadic;
pub mod partition;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub use beta::{construct_beta, construct_beta_logged, BetaWitness, ConstructionLog, WitnessFile};
pub use certify::{certify, Certification};
pub use dyadic::{Dyadic, Round};
pub use partition::{
    cell_sequence, uniform_partition, CellPlan, IntervalPartition, MeasureSpec, TorusInterval,
};

use crate::error::TorusError;

/// Membership and frequency comparison for a witness against its plan.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalReport {
    /// Powers whose cell membership was certified: min(witness N, plan length).
    pub certified: usize,
    /// Horizon of the frequency count: the plan length. Beyond `certified`
    /// the plan itself stands in for the membership sequence.
    pub horizon: usize,
    pub frequencies: Vec<BigRational>,
    pub deviations: Vec<BigRational>,
}

impl EmpiricalReport {
    pub fn max_deviation(&self) -> BigRational {
        self.deviations
            .iter()
            .cloned()
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

/// Checks that {βᵐ} lands in the planned cell for every certified m and
/// compares cell frequencies with the target masses.
pub fn empirical_measure(
    w: &BetaWitness,
    ms: &MeasureSpec,
    planned: &CellPlan,
) -> Result<EmpiricalReport, TorusError> {
    let certified = w.horizon().min(planned.len());
    let cells = ms.partition().cells();
    let mut membership = Vec::with_capacity(planned.len());
    let powers = certify::power_enclosures(&w.beta_lo, &w.beta_hi, certified, w.precision_bits);
    for (i, (lo, hi)) in powers.enumerate() {
        let m = i + 1;
        let (_, flo, fhi) =
            certify::fractional_enclosure(&lo, &hi).ok_or(TorusError::MembershipBreak { m })?;
        let cell = cells
            .iter()
            .position(|c| c.contains(&flo) && c.contains(&fhi))
            .map(|c| c + 1);
        if cell != Some(planned.cells[i]) {
            return Err(TorusError::MembershipBreak { m });
        }
        membership.push(planned.cells[i]);
    }
    membership.extend_from_slice(&planned.cells[certified..]);

    let horizon = membership.len();
    let mut counts = vec![0usize; cells.len()];
    for &c in &membership {
        counts[c - 1] += 1;
    }
    let frequencies: Vec<BigRational> = counts
        .iter()
        .map(|&c| BigRational::new(c.into(), horizon.max(1).into()))
        .collect();
    let deviations = frequencies
        .iter()
        .zip(ms.masses())
        .map(|(f, m)| (f - m).abs())
        .collect();
    Ok(EmpiricalReport {
        certified,
        horizon,
        frequencies,
        deviations,
    })
}
