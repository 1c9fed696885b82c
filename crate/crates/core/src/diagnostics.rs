//! Deficit/excess ledgers, deviation traces and an empirical convergence
//! report.

use std::cmp::Ordering;
use std::fmt;
use std::io;

use crate::error::DiagError;
use crate::scalar::Scalar;
use crate::scheduler::{LetterId, SchedulerState, Sequence};
use crate::spec::FrequencySpec;

/// Deficit and excess totals at one step.
///
/// `sum_deficits` includes the unmaterialized tail mass, since every letter
/// past the frontier is late by exactly its assigned frequency. The two sums
/// agree exactly in exact mode; `residual` is their difference.
#[derive(Clone, Debug, PartialEq)]
pub struct Ledger<S> {
    pub steps: u64,
    pub sum_deficits: S,
    pub sum_excesses: S,
    pub tail_mass: S,
    pub max_deficit_letter: LetterId,
    pub residual: S,
}

impl<S: Scalar> Ledger<S> {
    /// Whether deficits and excesses balance (exactly, or within the float
    /// tolerance).
    pub fn balanced(&self) -> bool {
        S::sum_residual_ok(&self.residual)
    }
}

pub fn ledger_at<S: Scalar>(state: &SchedulerState<S>) -> Result<Ledger<S>, DiagError> {
    if state.steps() == 0 {
        return Err(DiagError::ZeroSteps);
    }
    let mut deficits = S::zero();
    let mut excesses = S::zero();
    for i in 0..state.frontier() {
        let d = state
            .deficit(LetterId::new(i))
            .map_err(|_| DiagError::ZeroSteps)?;
        if d.is_positive() {
            deficits = deficits + d;
        } else {
            excesses = excesses - d;
        }
    }
    let tail_mass = state.spec().tail(state.frontier() - 1);
    let sum_deficits = deficits + tail_mass.clone();
    let residual = sum_deficits.clone() - excesses.clone();
    Ok(Ledger {
        steps: state.steps(),
        sum_deficits,
        sum_excesses: excesses,
        tail_mass,
        max_deficit_letter: state.select_next(),
        residual,
    })
}

/// Largest |λ_N(a) - λ(a)| over the whole alphabet. Letters past the
/// frontier contribute λ, bounded by the frontier letter's.
pub fn max_abs_deviation<S: Scalar>(state: &SchedulerState<S>) -> Result<S, DiagError> {
    let mut worst = S::zero();
    for i in 0..state.frontier() {
        let d = state
            .deficit(LetterId::new(i))
            .map_err(|_| DiagError::ZeroSteps)?
            .abs();
        if d > worst {
            worst = d;
        }
    }
    if let Some(f) = state.frontier_letter() {
        let l = state.lambda(f).unwrap_or_else(S::zero);
        if l > worst {
            worst = l;
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint<S> {
    pub n: usize,
    pub max_abs_deviation: S,
    pub sum_deficits: S,
    pub sum_excesses: S,
    pub argmax_letter: LetterId,
    /// λ_N(a) - λ(a) for each watched letter, in watch-list order.
    pub watched: Vec<S>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTrace<S> {
    pub points: Vec<TracePoint<S>>,
    pub watch_list: Vec<LetterId>,
    spec: FrequencySpec<S>,
}

impl<S: Scalar> ConvergenceTrace<S> {
    /// Writes the trace as CSV with header
    /// `N,max_abs_deviation,sum_deficits,sum_excesses,argmax_letter`.
    /// The letter column carries the caller's label.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "N",
            "max_abs_deviation",
            "sum_deficits",
            "sum_excesses",
            "argmax_letter",
        ])?;
        for p in &self.points {
            w.write_record([
                p.n.to_string(),
                p.max_abs_deviation.render(),
                p.sum_deficits.render(),
                p.sum_excesses.render(),
                self.spec.label(p.argmax_letter.index()).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn deviations(&self) -> impl Iterator<Item = (usize, &S)> {
        self.points.iter().map(|p| (p.n, &p.max_abs_deviation))
    }
}

/// Checkpoints 1, r, r², … up to `len`, with `len` itself appended.
pub fn geometric_checkpoints(len: usize, ratio: f64) -> Vec<usize> {
    let mut out = Vec::new();
    if len == 0 {
        return out;
    }
    let ratio = if ratio > 1.0 { ratio } else { 10.0 };
    let mut x = 1.0f64;
    while (x.round() as usize) <= len {
        let n = x.round() as usize;
        if out.last() != Some(&n) {
            out.push(n);
        }
        x *= ratio;
    }
    if out.last() != Some(&len) {
        out.push(len);
    }
    out
}

fn check_checkpoints(checkpoints: &[usize], len: usize) -> Result<(), DiagError> {
    if checkpoints.first() == Some(&0) || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DiagError::UnorderedCheckpoints);
    }
    if let Some(&last) = checkpoints.last() {
        if last > len {
            return Err(DiagError::CheckpointBeyondSequence {
                checkpoint: last,
                len,
            });
        }
    }
    Ok(())
}

/// Deviation, ledger totals and watched-letter deviations at each checkpoint.
pub fn deviation_trace<S: Scalar>(
    seq: &Sequence<S>,
    checkpoints: &[usize],
    watch_list: &[LetterId],
) -> Result<ConvergenceTrace<S>, DiagError> {
    check_checkpoints(checkpoints, seq.len())?;
    let mut state = SchedulerState::new(seq.spec().clone());
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for (i, &letter) in seq.letters().iter().enumerate() {
        let Some(&&target) = next.peek() else { break };
        state
            .push(letter)
            .map_err(|_| DiagError::CheckpointBeyondSequence {
                checkpoint: i + 1,
                len: seq.len(),
            })?;
        if i + 1 == target {
            next.next();
            let ledger = ledger_at(&state)?;
            let watched = watch_list
                .iter()
                .map(|&a| {
                    let lambda = state.spec().weight(a.index()).unwrap_or_else(S::zero);
                    S::from_ratio(state.count(a), state.steps()) - lambda
                })
                .collect();
            points.push(TracePoint {
                n: target,
                max_abs_deviation: max_abs_deviation(&state)?,
                sum_deficits: ledger.sum_deficits,
                sum_excesses: ledger.sum_excesses,
                argmax_letter: ledger.max_deficit_letter,
                watched,
            });
        }
    }
    Ok(ConvergenceTrace {
        points,
        watch_list: watch_list.to_vec(),
        spec: seq.spec().clone(),
    })
}

/// Descriptive summary of how fast the deviation shrinks.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvergenceReport {
    /// Least-squares slope of log(deviation) against log(N) over nonzero
    /// points, and sup_N N·deviation over all checkpoints.
    Rate {
        slope: f64,
        sup_scaled_deviation: f64,
        points_used: usize,
    },
    /// Deviation is zero at every checkpoint from `from_step` on.
    Exact { from_step: usize },
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvergenceReport::Rate {
                slope,
                sup_scaled_deviation,
                points_used,
            } => write!(
                f,
                "slope={slope:.6} sup_N N*max_abs_deviation={sup_scaled_deviation:.6} points={points_used}"
            ),
            ConvergenceReport::Exact { from_step } => write!(f, "exact from step {from_step}"),
        }
    }
}

pub fn convergence_report<S: Scalar>(
    trace: &ConvergenceTrace<S>,
) -> Result<ConvergenceReport, DiagError> {
    let pts = &trace.points;
    let (Some(first), Some(last)) = (pts.first(), pts.last()) else {
        return Err(DiagError::InsufficientCheckpoints);
    };
    if pts.len() < 3 || last.n < first.n * 100 {
        return Err(DiagError::InsufficientCheckpoints);
    }

    let sup_scaled = pts
        .iter()
        .map(|p| p.n as f64 * p.max_abs_deviation.to_f64())
        .fold(0.0f64, f64::max);
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| !p.max_abs_deviation.is_zero())
        .map(|p| ((p.n as f64).ln(), p.max_abs_deviation.to_f64().ln()))
        .collect();

    if logs.len() >= 2 {
        let k = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        return Ok(ConvergenceReport::Rate {
            slope: sxy / sxx,
            sup_scaled_deviation: sup_scaled,
            points_used: logs.len(),
        });
    }
    if last.max_abs_deviation.is_zero() {
        let from = pts
            .iter()
            .rposition(|p| !p.max_abs_deviation.is_zero())
            .map_or(first.n, |i| pts[i + 1].n);
        return Ok(ConvergenceReport::Exact { from_step: from });
    }
    Err(DiagError::DegenerateTrace)
}

/// Running extremes of λ_N(a) over N ≥ N_start.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyBounds<S> {
    pub letter: LetterId,
    pub running_min: S,
    pub running_max: S,
}

pub fn frequency_bounds<S: Scalar>(
    seq: &Sequence<S>,
    letter: LetterId,
    n_start: usize,
) -> Result<FrequencyBounds<S>, DiagError> {
    let len = seq.len();
    if n_start == 0 || n_start > len {
        return Err(DiagError::CheckpointBeyondSequence {
            checkpoint: n_start,
            len,
        });
    }
    // fractions count/N compared exactly by cross-multiplication
    let cmp = |a: (u64, u64), b: (u64, u64)| (a.0 as u128 * b.1 as u128).cmp(&(b.0 as u128 * a.1 as u128));
    let mut count = 0u64;
    let mut lo: Option<(u64, u64)> = None;
    let mut hi: Option<(u64, u64)> = None;
    for (i, &l) in seq.letters().iter().enumerate() {
        if l == letter {
            count += 1;
        }
        let n = i as u64 + 1;
        if (n as usize) < n_start {
            continue;
        }
        let f = (count, n);
        if lo.is_none_or(|m| cmp(f, m) == Ordering::Less) {
            lo = Some(f);
        }
        if hi.is_none_or(|m| cmp(f, m) == Ordering::Greater) {
            hi = Some(f);
        }
    }
    let (lo, hi) = (lo.expect("n_start <= len"), hi.expect("n_start <= len"));
    Ok(FrequencyBounds {
        letter,
        running_min: S::from_ratio(lo.0, lo.1),
        running_max: S::from_ratio(hi.0, hi.1),
    })
}

/// Finite-horizon upper-frequency check: for every sampled N ≥ N₀,
/// (λ_N(a) - λ(a))⁺ ≤ (λ_N₀(a) - λ(a))⁺ + 1/N₀. Returns the first sampled N
/// that violates it.
pub fn excess_regrowth<S: Scalar>(
    seq: &Sequence<S>,
    letter: LetterId,
    n0: usize,
    samples: &[usize],
) -> Result<Option<usize>, DiagError> {
    check_checkpoints(samples, seq.len())?;
    if n0 == 0 || n0 > seq.len() {
        return Err(DiagError::CheckpointBeyondSequence {
            checkpoint: n0,
            len: seq.len(),
        });
    }
    let lambda = seq.spec().weight(letter.index()).unwrap_or_else(S::zero);
    let letters = seq.letters();
    let mut prefix_counts = Vec::with_capacity(letters.len() + 1);
    prefix_counts.push(0u64);
    for &l in letters {
        let c = *prefix_counts.last().unwrap() + u64::from(l == letter);
        prefix_counts.push(c);
    }
    let excess_at = |n: usize| {
        let e = S::from_ratio(prefix_counts[n], n as u64) - lambda.clone();
        if e.is_positive() {
            e
        } else {
            S::zero()
        }
    };
    let bound = excess_at(n0) + S::from_ratio(1, n0 as u64);
    Ok(samples
        .iter()
        .copied()
        .filter(|&n| n >= n0)
        .find(|&n| excess_at(n) > bound))
}

/// Per-step audit of a run against the scheduler's invariants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub steps_checked: u64,
    pub conservation_violations: u64,
    /// |D_{M+1}(a) - D_M(a)| > 1/(M+1)
    pub increment_violations: u64,
    /// D_M(a) > λ(a), or equality while count(a) > 0 (or inequality while 0)
    pub cap_violations: u64,
    pub ledger_violations: u64,
    pub selection_violations: u64,
    pub ledgers_checked: u64,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        self.conservation_violations == 0
            && self.increment_violations == 0
            && self.cap_violations == 0
            && self.ledger_violations == 0
            && self.selection_violations == 0
    }
}

/// Which steps get a full ledger check during [`audit_run`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LedgerSampling {
    EveryStep,
    Checkpoints(f64),
}

/// Runs `n` terms from `prefix`, checking count conservation, the per-step
/// deficit increment bound, the deficit cap, selection soundness and the
/// deficit/excess ledger along the way.
pub fn audit_run<S: Scalar>(
    spec: &FrequencySpec<S>,
    prefix: &[LetterId],
    n: usize,
    sampling: LedgerSampling,
) -> Result<AuditReport, crate::ScheduleError> {
    let mut report = AuditReport::default();
    let mut state = SchedulerState::with_prefix(spec.clone(), prefix)?;
    let ledger_points = match sampling {
        LedgerSampling::EveryStep => None,
        LedgerSampling::Checkpoints(r) => Some(geometric_checkpoints(n, r)),
    };
    let wants_ledger = |m: u64| match &ledger_points {
        None => true,
        Some(points) => points.binary_search(&(m as usize)).is_ok(),
    };

    let snapshot = |state: &SchedulerState<S>| -> Vec<(LetterId, S)> {
        let mut letters: Vec<LetterId> = (0..state.frontier()).map(LetterId::new).collect();
        letters.extend(state.frontier_letter());
        letters
            .into_iter()
            .map(|a| (a, state.deficit(a).expect("steps > 0")))
            .collect()
    };

    let audit_state = |state: &SchedulerState<S>, report: &mut AuditReport| {
        if state.counts().iter().sum::<u64>() != state.steps() {
            report.conservation_violations += 1;
        }
        for i in 0..state.frontier() {
            let a = LetterId::new(i);
            let lambda = state.lambda(a).unwrap_or_else(S::zero);
            let d = state.deficit(a).expect("steps > 0");
            let ok = if state.count(a) == 0 {
                d == lambda
            } else {
                d < lambda
            };
            if !ok {
                report.cap_violations += 1;
            }
        }
        if wants_ledger(state.steps()) {
            report.ledgers_checked += 1;
            match ledger_at(state) {
                Ok(l) if l.balanced() => {}
                _ => report.ledger_violations += 1,
            }
        }
    };

    if state.steps() > 0 {
        audit_state(&state, &mut report);
    }
    while (state.steps() as usize) < n {
        let m = state.steps();
        let before = (m > 0).then(|| snapshot(&state));
        let chosen = state.step();
        report.steps_checked += 1;

        if let Some(before) = before {
            // selection soundness against the pre-step deficits
            let dc = before.iter().find(|(a, _)| *a == chosen).map(|(_, d)| d.clone());
            let max = before.iter().map(|(_, d)| d.clone()).fold(None, |acc: Option<S>, d| {
                Some(match acc {
                    Some(x) if x >= d => x,
                    _ => d,
                })
            });
            let sound = match (dc, max) {
                (Some(dc), Some(max)) => {
                    if max.is_positive() {
                        dc == max
                    } else {
                        chosen == LetterId::new(1)
                    }
                }
                _ => false,
            };
            if !sound {
                report.selection_violations += 1;
            }

            let bound = S::from_ratio(1, m + 1);
            for (a, d_before) in &before {
                let d_after = state.deficit(*a).expect("steps > 0");
                if (d_after - d_before.clone()).abs() > bound {
                    report.increment_violations += 1;
                }
            }
        } else if chosen != LetterId::new(1) {
            report.selection_violations += 1;
        }
        audit_state(&state, &mut report);
    }
    Ok(report)
}
