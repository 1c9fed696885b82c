use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::TorusError;
use crate::scalar::{render_ratio, Scalar};
use crate::scheduler::{generate, LetterId, Sequence};
use crate::spec::FrequencySpec;

/// A closed interval [lo, hi] ⊂ [0, 1] of the torus; no wrap-around.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusInterval {
    lo: BigRational,
    hi: BigRational,
}

impl TorusInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self, TorusError> {
        if lo.is_negative() || hi > BigRational::one() || lo >= hi {
            return Err(TorusError::InvalidInterval {
                lo: render_ratio(&lo),
                hi: render_ratio(&hi),
            });
        }
        Ok(TorusInterval { lo, hi })
    }

    pub fn full() -> Self {
        TorusInterval {
            lo: BigRational::zero(),
            hi: BigRational::one(),
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

impl fmt::Display for TorusInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", render_ratio(&self.lo), render_ratio(&self.hi))
    }
}

/// Cells I₁…I_p covering [0, 1], consecutive cells meeting at one endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalPartition {
    cells: Vec<TorusInterval>,
}

impl IntervalPartition {
    pub fn new(cells: Vec<TorusInterval>) -> Result<Self, TorusError> {
        let (Some(first), Some(last)) = (cells.first(), cells.last()) else {
            return Err(TorusError::BadPartition("no cells".into()));
        };
        if !first.lo.is_zero() || !last.hi.is_one() {
            return Err(TorusError::BadPartition("cells must cover [0, 1]".into()));
        }
        if let Some(i) = cells.windows(2).position(|w| w[0].hi != w[1].lo) {
            return Err(TorusError::BadPartition(format!(
                "cells {} and {} do not share an endpoint",
                i + 1,
                i + 2
            )));
        }
        Ok(IntervalPartition { cells })
    }

    pub fn cells(&self) -> &[TorusInterval] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Shortest cell length c_min.
    pub fn min_length(&self) -> BigRational {
        self.cells
            .iter()
            .map(TorusInterval::length)
            .min()
            .expect("nonempty partition")
    }

    pub fn cell(&self, id: usize) -> Option<&TorusInterval> {
        id.checked_sub(1).and_then(|i| self.cells.get(i))
    }
}

/// p equal cells [(i-1)/p, i/p].
pub fn uniform_partition(p: usize) -> IntervalPartition {
    assert!(p >= 1, "a partition needs at least one cell");
    let at = |i: usize| BigRational::new(i.into(), p.into());
    let cells = (1..=p)
        .map(|i| TorusInterval {
            lo: at(i - 1),
            hi: at(i),
        })
        .collect();
    IntervalPartition { cells }
}

/// Cell masses μ(Iᵢ) on a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureSpec {
    partition: IntervalPartition,
    masses: Vec<BigRational>,
    atoms: Vec<BigRational>,
}

impl MeasureSpec {
    pub fn new(
        partition: IntervalPartition,
        masses: Vec<BigRational>,
        atoms: Vec<BigRational>,
    ) -> Result<Self, TorusError> {
        if masses.len() != partition.len() {
            return Err(TorusError::BadMeasure(format!(
                "{} masses for {} cells",
                masses.len(),
                partition.len()
            )));
        }
        if let Some(i) = masses.iter().position(|m| !m.is_positive()) {
            return Err(TorusError::BadMeasure(format!("cell {} has nonpositive mass", i + 1)));
        }
        let total: BigRational = masses.iter().sum();
        if !total.is_one() {
            return Err(TorusError::BadMeasure(format!(
                "masses sum to {}",
                render_ratio(&total)
            )));
        }
        for atom in &atoms {
            let on_end = partition
                .cells()
                .iter()
                .any(|c| &c.lo == atom || &c.hi == atom);
            if on_end {
                return Err(TorusError::BadMeasure(format!(
                    "atom {} sits on a cell endpoint",
                    render_ratio(atom)
                )));
            }
        }
        Ok(MeasureSpec {
            partition,
            masses,
            atoms,
        })
    }

    pub fn partition(&self) -> &IntervalPartition {
        &self.partition
    }

    pub fn masses(&self) -> &[BigRational] {
        &self.masses
    }

    pub fn atoms(&self) -> &[BigRational] {
        &self.atoms
    }

    /// Democratic spec over the cells; internal letters map back to cell
    /// ids through the spec's labels.
    pub fn frequency_spec<S: Scalar>(&self) -> Result<FrequencySpec<S>, TorusError> {
        let weights = self.masses.iter().map(S::from_rational).collect();
        Ok(FrequencySpec::finite(weights)?)
    }
}

/// A democratic run over the cells, reported as 1-based cell ids.
#[derive(Clone, Debug)]
pub struct CellPlan {
    pub cells: Vec<usize>,
}

impl CellPlan {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Target intervals u₁…u_n for the β construction.
    pub fn intervals(&self, partition: &IntervalPartition) -> Vec<TorusInterval> {
        self.cells
            .iter()
            .map(|&c| partition.cell(c).expect("cell id in range").clone())
            .collect()
    }
}

/// Democratic sequence of `n` cells with frequencies μ(Iᵢ).
pub fn cell_sequence<S: Scalar>(ms: &MeasureSpec, n: usize) -> Result<(CellPlan, Sequence<S>), TorusError> {
    let spec = ms.frequency_spec::<S>()?;
    let seq = generate(&spec, &[], n)?;
    let cells = seq
        .letters()
        .iter()
        .map(|l: &LetterId| spec.label(l.index()))
        .collect();
    Ok((CellPlan { cells }, seq))
}
