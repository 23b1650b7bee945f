//! Large-order behaviour of the weak-coupling coefficients.
//!
//! The instanton rows follow `a_j ~ (-1)^{n+j+1} K^j j^A B`; [`estimate_a`],
//! [`estimate_k`] and [`estimate_b`] turn a row into finite-`j` estimate
//! sequences for Richardson extrapolation. The Blasius signs follow
//! `cos(a j + b)` instead, see [`sign_score`] and [`sign_grid_search`].

mod sign;
mod zeta;

pub use sign::{best_phase_free, normalize_row, sign_grid_search, sign_score, GridSearch, NormalizedRow, SignFit};
pub use zeta::{convolution_limit, convolution_sum, zeta, zeta_consistency_k, Convolution};

use serde::Serialize;
use thiserror::Error;

use crate::accel::{richardson_report, AccelError, RichardsonRow, SequenceData};
use crate::exact::BigFloat;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LargeOrderError {
    #[error("cos(a n + b) is within 1e-9 of zero at n = {0}")]
    AmbiguousPhase(usize),
    #[error("coefficient a_{0} is zero")]
    ZeroCoefficient(usize),
    #[error("B1 must be positive")]
    NonPositiveB1,
    #[error("K must be positive")]
    NonPositiveK,
    #[error("exponent A = -1 has no finite normalized limit")]
    MarginalExponent,
    #[error("convolution order j must be at least 4")]
    OrderTooSmall,
    #[error("no estimates after the last gap")]
    Empty,
    #[error(transparent)]
    Accel(#[from] AccelError),
}

/// Why an estimate is missing at some `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapReason {
    /// One of the coefficients entering the formula vanishes.
    ZeroCoefficient,
    /// The logarithm's argument is not positive.
    NonPositiveRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub j: usize,
    pub reason: GapReason,
}

/// Estimates indexed by `j`. Only the contiguous run after the last gap is
/// kept, since Richardson extrapolation needs consecutive entries.
#[derive(Debug, Clone)]
pub struct EstimateSequence {
    pub start: usize,
    pub values: Vec<BigFloat>,
    pub gaps: Vec<Gap>,
}

impl EstimateSequence {
    fn collect(first_j: usize, items: Vec<Result<BigFloat, GapReason>>) -> Self {
        let mut gaps = Vec::new();
        let mut start = first_j;
        let mut values = Vec::new();
        for (i, item) in items.into_iter().enumerate() {
            let j = first_j + i;
            match item {
                Ok(v) => values.push(v),
                Err(reason) => {
                    gaps.push(Gap { j, reason });
                    values.clear();
                    start = j + 1;
                }
            }
        }
        Self { start, values, gaps }
    }

    pub fn to_sequence(&self) -> Result<SequenceData, LargeOrderError> {
        if self.values.is_empty() {
            return Err(LargeOrderError::Empty);
        }
        Ok(SequenceData::new(self.start.max(1), self.values.clone())?)
    }

    pub fn last(&self) -> Option<&BigFloat> {
        self.values.last()
    }

    /// CSV with columns `j,estimate`.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("j,estimate\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.start + i, v.to_string_sig(digits)));
        }
        out
    }
}

/// Extra bits for the logarithms of ratios close to 1.
const GUARD_BITS: usize = 64;

fn widen(row: &[BigFloat]) -> Vec<BigFloat> {
    row.iter().map(|x| x.with_precision(x.precision() + GUARD_BITS)).collect()
}

fn narrow(x: BigFloat) -> BigFloat {
    let p = x.precision() - GUARD_BITS;
    x.with_precision(p)
}

/// `A_j = ln(a_{j+2} a_j / a_{j+1}^2) / ln(j (j+2) / (j+1)^2)` for `j >= 1`.
/// `row[j]` holds `a_j`.
pub fn estimate_a(row: &[BigFloat]) -> EstimateSequence {
    let row = widen(row);
    let items = (1..row.len().saturating_sub(2))
        .map(|j| {
            let (a0, a1, a2) = (&row[j], &row[j + 1], &row[j + 2]);
            if a0.is_zero() || a1.is_zero() || a2.is_zero() {
                return Err(GapReason::ZeroCoefficient);
            }
            let ratio = a2 * a0 / (a1 * a1);
            if !ratio.is_positive() {
                return Err(GapReason::NonPositiveRatio);
            }
            let prec = ratio.precision();
            let jj = j as i64;
            let den = BigFloat::from_i64(jj * (jj + 2), prec) / BigFloat::from_i64((jj + 1) * (jj + 1), prec);
            Ok(narrow(ratio.ln() / den.ln()))
        })
        .collect();
    EstimateSequence::collect(1, items)
}

/// `K_j = -(a_{j+1} / a_j) (j / (j+1))^A` for `j >= 1`.
pub fn estimate_k(row: &[BigFloat], a: &BigFloat) -> EstimateSequence {
    let row = widen(row);
    let a = a.with_precision(a.precision() + GUARD_BITS);
    let items = (1..row.len().saturating_sub(1))
        .map(|j| {
            if row[j].is_zero() || row[j + 1].is_zero() {
                return Err(GapReason::ZeroCoefficient);
            }
            let prec = row[j].precision();
            let frac = BigFloat::from_i64(j as i64, prec) / BigFloat::from_i64(j as i64 + 1, prec);
            Ok(narrow(-(&row[j + 1] / &row[j]) * (&a * &frac.ln()).exp()))
        })
        .collect();
    EstimateSequence::collect(1, items)
}

/// `B_j = |a_j| / (K^j j^A)` for `j >= 1`.
pub fn estimate_b(row: &[BigFloat], k: &BigFloat, a: &BigFloat) -> Result<EstimateSequence, LargeOrderError> {
    if !k.is_positive() {
        return Err(LargeOrderError::NonPositiveK);
    }
    let row = widen(row);
    let a = a.with_precision(a.precision() + GUARD_BITS);
    let ln_k = k.with_precision(k.precision() + GUARD_BITS).ln();
    let items = (1..row.len())
        .map(|j| {
            let prec = row[j].precision();
            let jf = BigFloat::from_i64(j as i64, prec);
            let log_scale = &ln_k * &jf + &a * &jf.ln();
            Ok(narrow(row[j].abs() / log_scale.exp()))
        })
        .collect();
    Ok(EstimateSequence::collect(1, items))
}

/// `a_j ~ (-1)^{n+j+1} K^j j^A B` at one site.
#[derive(Debug, Clone)]
pub struct GrowthAnsatz {
    pub site: usize,
    pub k: BigFloat,
    pub a: BigFloat,
    pub b: BigFloat,
}

impl GrowthAnsatz {
    /// Planted row `a_0 .. a_len-1` following the ansatz exactly (`a_0` is
    /// set to zero, the formula needs `j >= 1`).
    pub fn synthesize(&self, len: usize) -> Vec<BigFloat> {
        let prec = self.k.precision();
        (0..len)
            .map(|j| {
                if j == 0 {
                    return BigFloat::zero(prec);
                }
                let jf = BigFloat::from_i64(j as i64, prec);
                let mag = &self.b * (&self.k.ln() * &jf + &self.a * &jf.ln()).exp();
                if (self.site + j + 1) % 2 == 0 {
                    mag
                } else {
                    -mag
                }
            })
            .collect()
    }
}

/// Estimate sequences and Richardson tables for `A`, `K` and `B` at one site.
#[derive(Debug, Clone)]
pub struct LargeOrderFit {
    pub site: usize,
    pub a_estimates: EstimateSequence,
    pub a_table: Vec<RichardsonRow>,
    pub k_estimates: EstimateSequence,
    pub k_table: Vec<RichardsonRow>,
    pub b_estimates: EstimateSequence,
    pub b_table: Vec<RichardsonRow>,
    /// The values assumed downstream: `K` is estimated with `A` fixed and
    /// `B` with both fixed.
    pub assumed_a: BigFloat,
    pub assumed_k: BigFloat,
}

/// Runs the three estimators with `k_max` Richardson orders. `K` is fitted
/// under `assumed_a` and `B` under `assumed_a` and `assumed_k`; when either
/// is `None` the highest-order Richardson value is used.
pub fn fit_growth(
    row: &[BigFloat],
    site: usize,
    k_max: usize,
    assumed_a: Option<BigFloat>,
    assumed_k: Option<BigFloat>,
) -> Result<LargeOrderFit, LargeOrderError> {
    let a_estimates = estimate_a(row);
    let a_table = richardson_report(&a_estimates.to_sequence()?, k_max)?;
    let assumed_a = assumed_a.unwrap_or_else(|| a_table.last().expect("k_max >= 1").value.clone());
    let k_estimates = estimate_k(row, &assumed_a);
    let k_table = richardson_report(&k_estimates.to_sequence()?, k_max)?;
    let assumed_k = assumed_k.unwrap_or_else(|| k_table.last().expect("k_max >= 1").value.clone());
    let b_estimates = estimate_b(row, &assumed_k, &assumed_a)?;
    let b_table = richardson_report(&b_estimates.to_sequence()?, k_max)?;
    Ok(LargeOrderFit { site, a_estimates, a_table, k_estimates, k_table, b_estimates, b_table, assumed_a, assumed_k })
}
