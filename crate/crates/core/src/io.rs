//! Text formats: weights files, partition files and JSON-lines sequences.

use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::torus::{IntervalPartition, MeasureSpec, TorusInterval};
use crate::TorusError;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: cannot parse `{token}` as a number")]
    Number { line: usize, token: String },
    #[error("line {line}: expected `lo hi mass`")]
    Fields { line: usize },
    #[error("no entries")]
    Empty,
    #[error(transparent)]
    Torus(#[from] TorusError),
}

/// Parses `p/q`, an integer, or a decimal literal (optionally with an
/// exponent) into an exact rational.
pub fn parse_rational(token: &str) -> Option<BigRational> {
    let token = token.trim();
    if token.is_empty() {
        return None;
    }
    if let Some((p, q)) = token.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q <= BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exp) = match token.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (token, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let ten = BigInt::from(10);
    let scale = exp - frac_part.len() as i32 - 1;
    let value = if scale >= 0 {
        BigRational::from_integer(digits * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(digits, Pow::pow(&ten, (-scale) as u32))
    };
    Some(if neg { -value } else { value })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// One weight per line; `#` starts a comment line.
pub fn parse_weights(text: &str) -> Result<Vec<BigRational>, ParseError> {
    let weights = content_lines(text)
        .map(|(line, l)| {
            parse_rational(l).ok_or_else(|| ParseError::Number {
                line,
                token: l.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if weights.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(weights)
}

/// Lines `lo hi mass`; `#` starts a comment line.
pub fn parse_partition(text: &str) -> Result<MeasureSpec, ParseError> {
    let mut cells = Vec::new();
    let mut masses = Vec::new();
    for (line, l) in content_lines(text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(ParseError::Fields { line });
        }
        let num = |t: &str| {
            parse_rational(t).ok_or_else(|| ParseError::Number {
                line,
                token: t.to_string(),
            })
        };
        cells.push(TorusInterval::new(num(fields[0])?, num(fields[1])?)?);
        masses.push(num(fields[2])?);
    }
    if cells.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(MeasureSpec::new(IntervalPartition::new(cells)?, masses, Vec::new())?)
}

/// One JSON-lines record of an emitted sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub n: usize,
    pub letter: usize,
}

/// Writes `{"n":…,"letter":…}` per term, 1-based `n`, letter 0 for the Joker.
pub fn write_jsonl<W: Write>(mut out: W, letters: &[usize]) -> io::Result<()> {
    for (i, &letter) in letters.iter().enumerate() {
        serde_json::to_writer(&mut out, &TermRecord { n: i + 1, letter })?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
