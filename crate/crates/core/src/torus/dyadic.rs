//! Binary floating point of arbitrary precision with explicit directed
//! rounding: `mant · 2^exp`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Rounding direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// An exact dyadic rational, normalized so the mantissa is odd (or zero
/// with exponent 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Dyadic { mant, exp: 0 };
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        Dyadic {
            mant: mant >> tz,
            exp: exp + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Dyadic::new(BigInt::zero(), 0)
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Dyadic::new(v.into(), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&Dyadic::new(-&other.mant, other.exp))
    }

    /// (self + other) / 2, exact.
    pub fn midpoint(&self, other: &Dyadic) -> Dyadic {
        let s = self.add(other);
        Dyadic::new(s.mant, s.exp - 1)
    }

    /// Rounds to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Round) -> Dyadic {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let divisor = BigInt::one() << shift;
        let q = match dir {
            Round::Down => self.mant.div_floor(&divisor),
            Round::Up => self.mant.div_ceil(&divisor),
        };
        Dyadic::new(q, self.exp + shift as i64)
    }

    pub fn mul_round(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        self.mul(other).round(prec, dir)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Rounds a rational onto the grid 2^-frac_bits·ℤ, then to `prec` bits.
    pub fn from_rational(r: &BigRational, prec: u32, dir: Round) -> Dyadic {
        let frac_bits = prec as u64 + r.denom().bits() + 2;
        let scaled = r.numer() << frac_bits;
        let q = match dir {
            Round::Down => scaled.div_floor(r.denom()),
            Round::Up => scaled.div_ceil(r.denom()),
        };
        Dyadic::new(q, -(frac_bits as i64)).round(prec, dir)
    }

    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        self.to_rational().cmp(r)
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            self.mant.div_floor(&(BigInt::one() << (-self.exp) as u64))
        }
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        let shift = (bits - 60).max(0);
        let m = &self.mant >> shift as u64;
        let m: f64 = num_traits::ToPrimitive::to_f64(&m).unwrap_or(f64::NAN);
        m * 2f64.powi((self.exp + shift) as i32)
    }

    /// Hexadecimal floating-point literal, e.g. `0x1.8p+1`; exact.
    pub fn to_hex(&self) -> String {
        if self.mant.is_zero() {
            return "0x0p+0".to_string();
        }
        let sign = if self.mant.sign() == Sign::Minus { "-" } else { "" };
        let mag = self.mant.magnitude();
        let frac_bits = mag.bits() - 1;
        let e = self.exp + frac_bits as i64;
        let pad = (4 - frac_bits % 4) % 4;
        let frac = (mag - (num_bigint::BigUint::one() << frac_bits)) << pad;
        let digits = ((frac_bits + pad) / 4) as usize;
        if digits == 0 {
            format!("{sign}0x1p{e:+}")
        } else {
            format!("{sign}0x1.{:0>width$x}p{e:+}", frac, width = digits)
        }
    }

    pub fn from_hex(s: &str) -> Result<Dyadic, ParseDyadicError> {
        let err = || ParseDyadicError(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let body = body
            .strip_prefix("0x")
            .or_else(|| body.strip_prefix("0X"))
            .ok_or_else(err)?;
        let (mantissa, exp) = body.split_once(['p', 'P']).ok_or_else(err)?;
        let exp: i64 = exp.parse().map_err(|_| err())?;
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let digits = format!("{int_part}{frac_part}");
        if digits.is_empty() {
            return Err(err());
        }
        let mant = BigInt::parse_bytes(digits.as_bytes(), 16).ok_or_else(err)?;
        let mant = if neg { -mant } else { mant };
        Ok(Dyadic::new(mant, exp - 4 * frac_part.len() as i64))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid hexadecimal float `{0}`")]
pub struct ParseDyadicError(String);
