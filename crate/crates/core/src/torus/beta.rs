//! Nested-interval construction of β > 1 with {βᵐ} in prescribed cells.
//!
//! Start from the enclosure [B, B+1]. At step m the image of the current
//! enclosure under x ↦ xᵐ is long enough to contain a whole integer
//! translate n_m + I_m; the target is shrunk by an eighth of its length on
//! each side and the enclosure is cut down to the preimage of the shrunk
//! target. Every step is certified with outward rounding before moving on.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::dyadic::{Dyadic, Round};
use super::partition::TorusInterval;
use crate::error::TorusError;
use crate::scalar::render_ratio;

pub const START_PRECISION_BITS: u32 = 128;
pub const MAX_PRECISION_BITS: u32 = 1 << 20;

/// Certified enclosure [β_lo, β_hi] with βᵐ ∈ n_m + I_m for m = 1..=N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaWitness {
    pub beta_lo: Dyadic,
    pub beta_hi: Dyadic,
    pub precision_bits: u32,
    pub targets: Vec<TorusInterval>,
    pub integer_parts: Vec<BigInt>,
}

impl BetaWitness {
    pub fn horizon(&self) -> usize {
        self.targets.len()
    }

    pub fn to_json(&self) -> WitnessFile {
        WitnessFile {
            precision_bits: self.precision_bits,
            beta_lo_hex: self.beta_lo.to_hex(),
            beta_hi_hex: self.beta_hi.to_hex(),
            n: self.horizon(),
            integer_parts: self.integer_parts.iter().map(BigInt::to_string).collect(),
            intervals: self
                .targets
                .iter()
                .map(|t| [render_ratio(t.lo()), render_ratio(t.hi())])
                .collect(),
        }
    }

    pub fn from_json(file: &WitnessFile) -> Result<Self, WitnessFormatError> {
        let bad = |what: &str| WitnessFormatError(what.to_string());
        let beta_lo = Dyadic::from_hex(&file.beta_lo_hex).map_err(|e| bad(&e.to_string()))?;
        let beta_hi = Dyadic::from_hex(&file.beta_hi_hex).map_err(|e| bad(&e.to_string()))?;
        let integer_parts = file
            .integer_parts
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|_| bad("integer part")))
            .collect::<Result<Vec<_>, _>>()?;
        let targets = file
            .intervals
            .iter()
            .map(|[lo, hi]| {
                let lo = lo.parse::<BigRational>().map_err(|_| bad("interval endpoint"))?;
                let hi = hi.parse::<BigRational>().map_err(|_| bad("interval endpoint"))?;
                TorusInterval::new(lo, hi).map_err(|e| bad(&e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if targets.len() != file.n || integer_parts.len() != file.n {
            return Err(bad("N disagrees with list lengths"));
        }
        Ok(BetaWitness {
            beta_lo,
            beta_hi,
            precision_bits: file.precision_bits,
            targets,
            integer_parts,
        })
    }
}

/// On-disk witness layout. β endpoints are hexadecimal float literals,
/// integer parts decimal strings, interval endpoints `p/q` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub precision_bits: u32,
    pub beta_lo_hex: String,
    pub beta_hi_hex: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub integer_parts: Vec<String>,
    pub intervals: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed witness: {0}")]
pub struct WitnessFormatError(String);

/// Enclosures and working precision after each construction step.
#[derive(Clone, Debug, Default)]
pub struct ConstructionLog {
    pub base: BigInt,
    pub enclosures: Vec<(Dyadic, Dyadic)>,
    pub precision: Vec<u32>,
}

/// B = max(2, ⌈2/c_min⌉ + 1).
pub fn start_integer(c_min: &BigRational) -> BigInt {
    let two = BigRational::from_integer(BigInt::from(2));
    let b: BigInt = (two / c_min).ceil().to_integer() + 1;
    b.max(BigInt::from(2))
}

/// xᵐ for x > 0, rounded in direction `dir` after every product.
pub(crate) fn pow_directed(x: &Dyadic, m: usize, prec: u32, dir: Round) -> Dyadic {
    let mut result = Dyadic::from_int(1);
    let mut base = x.clone();
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul_round(&base, prec, dir);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul_round(&base, prec, dir);
        }
    }
    result
}

enum StepFailure {
    Rounding,
    ImageTooShort,
}

struct StepResult {
    integer_part: BigInt,
    lo: Dyadic,
    hi: Dyadic,
}

fn ge(x: &Dyadic, r: &BigRational) -> bool {
    x.cmp_rational(r) != std::cmp::Ordering::Less
}

fn le(x: &Dyadic, r: &BigRational) -> bool {
    x.cmp_rational(r) != std::cmp::Ordering::Greater
}

/// Smallest grid point x in [lo, hi] with ⌊xᵐ⌋_prec ≥ target.
fn lower_root(
    lo: &Dyadic,
    hi: &Dyadic,
    m: usize,
    target: &BigRational,
    prec: u32,
) -> Result<Dyadic, StepFailure> {
    if ge(&pow_directed(lo, m, prec, Round::Down), target) {
        return Ok(lo.clone());
    }
    if !ge(&pow_directed(hi, m, prec, Round::Down), target) {
        return Err(StepFailure::Rounding);
    }
    let (mut a, mut b) = (lo.clone(), hi.clone());
    loop {
        let mid = a.midpoint(&b).round(prec, Round::Down);
        if mid <= a || mid >= b {
            return Ok(b);
        }
        if ge(&pow_directed(&mid, m, prec, Round::Down), target) {
            b = mid;
        } else {
            a = mid;
        }
    }
}

/// Largest grid point x in [lo, hi] with ⌈xᵐ⌉_prec ≤ target.
fn upper_root(
    lo: &Dyadic,
    hi: &Dyadic,
    m: usize,
    target: &BigRational,
    prec: u32,
) -> Result<Dyadic, StepFailure> {
    if le(&pow_directed(hi, m, prec, Round::Up), target) {
        return Ok(hi.clone());
    }
    if !le(&pow_directed(lo, m, prec, Round::Up), target) {
        return Err(StepFailure::Rounding);
    }
    let (mut a, mut b) = (lo.clone(), hi.clone());
    loop {
        let mid = a.midpoint(&b).round(prec, Round::Down);
        if mid <= a || mid >= b {
            return Ok(a);
        }
        if le(&pow_directed(&mid, m, prec, Round::Up), target) {
            a = mid;
        } else {
            b = mid;
        }
    }
}

fn refine(
    lo: &Dyadic,
    hi: &Dyadic,
    m: usize,
    target: &TorusInterval,
    prec: u32,
) -> Result<StepResult, StepFailure> {
    let image_lo = pow_directed(lo, m, prec, Round::Down).to_rational();
    let image_hi = pow_directed(hi, m, prec, Round::Up).to_rational();

    // smallest n with n + lo_m ≥ image_lo
    let n = (&image_lo - target.lo()).ceil().to_integer();
    let n_q = BigRational::from_integer(n.clone());
    if &n_q + target.hi() > image_hi {
        return Err(StepFailure::ImageTooShort);
    }

    let margin = target.length() / BigRational::from_integer(8.into());
    let t_lo = &n_q + target.lo() + &margin;
    let t_hi = &n_q + target.hi() - &margin;

    let new_lo = lower_root(lo, hi, m, &t_lo, prec)?;
    let new_hi = upper_root(&new_lo, hi, m, &t_hi, prec)?;
    if new_lo >= new_hi {
        return Err(StepFailure::Rounding);
    }
    let certified = ge(&pow_directed(&new_lo, m, prec, Round::Down), &t_lo)
        && le(&pow_directed(&new_hi, m, prec, Round::Up), &t_hi);
    if !certified {
        return Err(StepFailure::Rounding);
    }
    Ok(StepResult {
        integer_part: n,
        lo: new_lo,
        hi: new_hi,
    })
}

/// Builds a witness for the targets `intervals[m-1]`, m = 1..=N.
pub fn construct_beta(
    intervals: &[TorusInterval],
    c_min: &BigRational,
) -> Result<BetaWitness, TorusError> {
    construct_beta_logged(intervals, c_min, MAX_PRECISION_BITS).map(|(w, _)| w)
}

/// [`construct_beta`] with a precision ceiling, also returning the
/// per-step enclosures.
pub fn construct_beta_logged(
    intervals: &[TorusInterval],
    c_min: &BigRational,
    max_bits: u32,
) -> Result<(BetaWitness, ConstructionLog), TorusError> {
    if intervals.is_empty() {
        return Err(TorusError::EmptyTargets);
    }
    if c_min <= &BigRational::from_integer(0.into()) {
        return Err(TorusError::IntervalTooShort { index: 0 });
    }
    if let Some(i) = intervals.iter().position(|t| &t.length() < c_min) {
        return Err(TorusError::IntervalTooShort { index: i + 1 });
    }

    let base = start_integer(c_min);
    let mut lo = Dyadic::from_int(base.clone());
    let mut hi = Dyadic::from_int(&base + 1);
    let mut prec = START_PRECISION_BITS.min(max_bits);
    let mut integer_parts = Vec::with_capacity(intervals.len());
    let mut log = ConstructionLog {
        base,
        ..ConstructionLog::default()
    };

    for (i, target) in intervals.iter().enumerate() {
        let m = i + 1;
        let step = loop {
            match refine(&lo, &hi, m, target, prec) {
                Ok(step) => break step,
                Err(StepFailure::ImageTooShort) => return Err(TorusError::ImageTooShort { m }),
                Err(StepFailure::Rounding) => {
                    if prec >= max_bits {
                        return Err(TorusError::PrecisionExhausted { m });
                    }
                    prec = (prec * 2).min(max_bits);
                }
            }
        };
        integer_parts.push(step.integer_part);
        lo = step.lo;
        hi = step.hi;
        log.enclosures.push((lo.clone(), hi.clone()));
        log.precision.push(prec);
    }

    let mut witness = BetaWitness {
        beta_lo: lo,
        beta_hi: hi,
        precision_bits: prec,
        targets: intervals.to_vec(),
        integer_parts,
    };
    // the final check uses the independent certifier
    loop {
        let cert = super::certify::certify(&witness);
        match cert.failing_m {
            None => break,
            Some(m) if witness.precision_bits >= max_bits => {
                return Err(TorusError::PrecisionExhausted { m })
            }
            Some(_) => witness.precision_bits = (witness.precision_bits * 2).min(max_bits),
        }
    }
    Ok((witness, log))
}

/// Approximate midpoint of the enclosure, for display.
pub fn beta_estimate(w: &BetaWitness) -> f64 {
    w.beta_lo.midpoint(&w.beta_hi).to_f64()
}

/// Approximate fractional part of βᵐ at the enclosure midpoint, for display.
pub fn fractional_estimate(w: &BetaWitness, m: usize) -> f64 {
    let mid = w.beta_lo.midpoint(&w.beta_hi);
    let p = pow_directed(&mid, m, w.precision_bits, Round::Down).to_rational();
    let frac = &p - BigRational::from_integer(p.numer().div_floor(p.denom()));
    frac.to_f64().unwrap_or(f64::NAN)
}
