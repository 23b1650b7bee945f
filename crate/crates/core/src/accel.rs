//! Richardson extrapolation for sequences with a `1/n` power-series tail.
//!
//! ```text
//! R_n^{(k)} = sum_{j=0..k} (-1)^{j+k} A_{n+j} (n+j)^k / (j! (k-j)!)
//! ```
//!
//! annihilates the `1/n, ..., 1/n^k` corrections of `A_n`.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{BigFloat, Rational};

/// Entries inspected when classifying a transformed sequence.
pub const FLAG_WINDOW: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AccelError {
    #[error("need at least {needed} entries, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("Richardson order must be at least 1")]
    ZeroOrder,
    #[error("sequence index must start at n >= 1")]
    ZeroStart,
}

/// `A_n` for `n = start, start + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceData {
    pub start: usize,
    pub values: Vec<BigFloat>,
}

impl SequenceData {
    pub fn new(start: usize, values: Vec<BigFloat>) -> Result<Self, AccelError> {
        if start == 0 {
            return Err(AccelError::ZeroStart);
        }
        if values.len() < 2 {
            return Err(AccelError::InsufficientData { needed: 2, have: values.len() });
        }
        Ok(Self { start, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> &BigFloat {
        self.values.last().expect("nonempty")
    }

    /// Index of the last entry.
    pub fn end(&self) -> usize {
        self.start + self.values.len() - 1
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn richardson(seq: &SequenceData, k: usize) -> Result<SequenceData, AccelError> {
    if k == 0 {
        return Err(AccelError::ZeroOrder);
    }
    if seq.len() < k + 1 {
        return Err(AccelError::InsufficientData { needed: k + 1, have: seq.len() });
    }
    let prec = seq.values.iter().map(BigFloat::precision).max().unwrap_or(crate::DEFAULT_PRECISION);
    // the weights alternate and grow like n^k, so accumulate with guard bits
    let wp = prec + 64 + k * (usize::BITS - (seq.end() + 1).leading_zeros()) as usize;
    let denoms: Vec<BigInt> = (0..=k).map(|j| factorial(j) * factorial(k - j)).collect();
    let values = (0..seq.len() - k)
        .map(|i| {
            let n = seq.start + i;
            let mut acc = BigFloat::zero(wp);
            for (j, den) in denoms.iter().enumerate() {
                let mut w = Rational::new(BigInt::from(n + j).pow(k as u32), den.clone());
                if (j + k) % 2 == 1 {
                    w = -w;
                }
                acc = acc + BigFloat::from_rational(&w, wp) * &seq.values[i + j].with_precision(wp);
            }
            acc.with_precision(prec)
        })
        .collect();
    Ok(SequenceData { start: seq.start, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Oscillating,
}

impl std::fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::Oscillating => "oscillating",
        })
    }
}

/// Classifies the last `FLAG_WINDOW` entries.
pub fn monotonicity(values: &[BigFloat]) -> Monotonicity {
    let tail = &values[values.len().saturating_sub(FLAG_WINDOW)..];
    let diffs: Vec<i32> = tail.windows(2).map(|w| (&w[1] - &w[0]).signum()).collect();
    if diffs.iter().all(|&d| d > 0) {
        Monotonicity::Increasing
    } else if diffs.iter().all(|&d| d < 0) {
        Monotonicity::Decreasing
    } else {
        Monotonicity::Oscillating
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RichardsonRow {
    pub k: usize,
    /// Last entry of `R^{(k)}`.
    pub value: BigFloat,
    pub flag: Monotonicity,
}

pub fn richardson_report(seq: &SequenceData, k_max: usize) -> Result<Vec<RichardsonRow>, AccelError> {
    if k_max == 0 {
        return Err(AccelError::ZeroOrder);
    }
    let needed = k_max + FLAG_WINDOW;
    if seq.len() < needed {
        return Err(AccelError::InsufficientData { needed, have: seq.len() });
    }
    (1..=k_max)
        .map(|k| {
            let r = richardson(seq, k)?;
            Ok(RichardsonRow { k, value: r.last().clone(), flag: monotonicity(&r.values) })
        })
        .collect()
}

/// CSV with columns `k,value,flag`.
pub fn report_to_csv(rows: &[RichardsonRow], digits: usize) -> String {
    let mut out = String::from("k,value,flag\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.k, r.value.to_string_sig(digits), r.flag));
    }
    out
}

/// True if every entry equals the first within `rel` relative error.
pub fn is_constant(values: &[BigFloat], rel: &BigFloat) -> bool {
    let first = &values[0];
    let scale = if first.is_zero() { BigFloat::one(first.precision()) } else { first.abs() };
    values.iter().all(|v| (v - first).abs() <= rel * &scale)
}
