//! Arithmetic backends for frequencies and deficits.
//!
//! Two backends are provided: exact arbitrary-size rationals and `f64`.
//! The scheduler is generic over [`Scalar`] so the same selection code
//! runs in both modes.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Arithmetic mode of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown mode `{other}` (expected exact|float)")),
        }
    }
}

/// Tolerance on `1 - Σλ` accepted in float mode.
pub const FLOAT_SUM_TOLERANCE: f64 = 1.0 / (1u64 << 40) as f64;

/// A number type usable for assigned frequencies and deficits.
pub trait Scalar: Signed + Clone + PartialOrd + fmt::Debug + Send + Sync + 'static {
    const MODE: Mode;

    /// `num / den` in this representation.
    fn from_ratio(num: u64, den: u64) -> Self;

    /// Converts an exact rational, rounding to nearest for floats.
    fn from_rational(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Whether `residual` (= 1 - Σλ) is acceptable for a finite spec.
    fn sum_residual_ok(residual: &Self) -> bool;

    /// Whether `a` and `b` agree within the mode's tolerance.
    fn approx_eq(a: &Self, b: &Self) -> bool {
        Self::sum_residual_ok(&(a.clone() - b.clone()))
    }

    /// Signed deficit `λ - count/steps`. `steps` must be nonzero.
    fn deficit(lambda: &Self, count: u64, steps: u64) -> Self {
        lambda.clone() - Self::from_ratio(count, steps)
    }

    /// Compares `λa - ca/steps` against `λb - cb/steps`.
    fn cmp_deficits(la: &Self, ca: u64, lb: &Self, cb: u64, steps: u64) -> Ordering {
        Self::deficit(la, ca, steps)
            .partial_cmp(&Self::deficit(lb, cb, steps))
            .unwrap_or(Ordering::Equal)
    }

    /// Whether `λ - count/steps > 0`.
    fn deficit_positive(lambda: &Self, count: u64, steps: u64) -> bool {
        Self::deficit(lambda, count, steps).is_positive()
    }

    /// Text form used in traces and messages: `p/q` for rationals,
    /// 17 significant digits for floats.
    fn render(&self) -> String;
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sum_residual_ok(residual: &Self) -> bool {
        residual.abs() <= FLOAT_SUM_TOLERANCE
    }

    fn render(&self) -> String {
        format!("{self:.16e}")
    }
}

impl Scalar for BigRational {
    const MODE: Mode = Mode::Exact;

    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sum_residual_ok(residual: &Self) -> bool {
        residual.is_zero()
    }

    fn deficit_positive(lambda: &Self, count: u64, steps: u64) -> bool {
        // λ = p/q with q > 0: p·steps > count·q
        lambda.numer() * BigInt::from(steps) > lambda.denom() * BigInt::from(count)
    }

    fn cmp_deficits(la: &Self, ca: u64, lb: &Self, cb: u64, steps: u64) -> Ordering {
        // steps·D = (steps·p - c·q)/q; cross-multiply by the positive denominators.
        let steps = BigInt::from(steps);
        let na = la.numer() * &steps - la.denom() * BigInt::from(ca);
        let nb = lb.numer() * &steps - lb.denom() * BigInt::from(cb);
        (na * lb.denom()).cmp(&(nb * la.denom()))
    }

    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Renders a rational as `p/q` even when it is an integer.
pub fn render_ratio(r: &BigRational) -> String {
    r.render()
}
