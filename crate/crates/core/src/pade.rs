//! Strong-coupling approximants from the surviving denominator coefficient.
//!
//! For `S(δ) = δ^M (1 + a_1 δ + ...)` the series is raised to `-N/M`, giving
//! `S^{N/M} = δ^N / (c_0 + ... + c_N δ^N + ...)`. Truncating at `δ^N` and
//! letting `δ -> ∞` leaves `S_N = c_N^{-M/N}`. A negative `c_N` makes the
//! principal root complex.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exact::{format_rational, principal_power, BigFloat, ComplexBigFloat, ExactError, PowerSeries, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadeError {
    #[error("c_N vanishes at N = {0}; the approximant is undefined")]
    DegenerateCoefficient(usize),
    #[error("order N = {requested} outside 1..={available}")]
    OrderOutOfRange { requested: usize, available: usize },
    #[error("Frobenius exponent M must be nonzero")]
    ZeroExponent,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// `δ^M` times a power series with constant term 1.
#[derive(Debug, Clone)]
pub struct FrobeniusSeries {
    coefficients: PowerSeries,
    m: Rational,
}

impl FrobeniusSeries {
    pub fn new(coefficients: PowerSeries, m: Rational) -> Result<Self, PadeError> {
        if !num_traits::One::is_one(coefficients.coeff(0)) {
            return Err(ExactError::NonUnitLeadingCoefficient(format_rational(coefficients.coeff(0))).into());
        }
        if m.is_zero() {
            return Err(PadeError::ZeroExponent);
        }
        Ok(Self { coefficients, m })
    }

    pub fn coefficients(&self) -> &PowerSeries {
        &self.coefficients
    }

    pub fn exponent(&self) -> &Rational {
        &self.m
    }

    pub fn order(&self) -> usize {
        self.coefficients.order()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximantRecord {
    pub n: usize,
    /// `c_N^{(N)}`, exact.
    pub c_n: Rational,
    pub s_n: ComplexBigFloat,
    pub is_real: bool,
}

pub fn strong_coupling_approximant(
    series: &FrobeniusSeries,
    n: usize,
    prec: usize,
) -> Result<ApproximantRecord, PadeError> {
    if n == 0 || n > series.order() {
        return Err(PadeError::OrderOutOfRange { requested: n, available: series.order() });
    }
    let nr = Rational::from_integer(n.into());
    let alpha = -(&nr / &series.m);
    let truncated = series.coefficients.truncate(n)?;
    let w = truncated.pow(&alpha, n)?;
    let c_n = w.coeff(n).clone();
    if c_n.is_zero() {
        return Err(PadeError::DegenerateCoefficient(n));
    }
    let s_n = principal_power(&c_n, &(-(&series.m / &nr)), prec)?;
    // the realness flag follows the exact sign of c_N, not the float result
    let is_real = c_n.is_positive();
    let s_n = if is_real { ComplexBigFloat::real(s_n.re) } else { s_n };
    Ok(ApproximantRecord { n, c_n, s_n, is_real })
}

/// A maximal run of orders with complex approximants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexWindow {
    pub start: usize,
    /// Last complex order; `end + 1` is real again unless the sweep stops.
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    Downward,
    Upward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    /// First order on the new side of the reference.
    pub n: usize,
    pub direction: CrossingDirection,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub records: Vec<ApproximantRecord>,
    /// Orders where `c_N = 0`.
    pub gaps: Vec<usize>,
    pub complex_windows: Vec<ComplexWindow>,
    /// Order of the smallest real approximant.
    pub argmin: Option<usize>,
    /// Interior local minima of the real approximants (neighbours must be real).
    pub local_minima: Vec<usize>,
    pub crossings: Vec<Crossing>,
}

impl Sweep {
    pub fn record(&self, n: usize) -> Option<&ApproximantRecord> {
        self.records.iter().find(|r| r.n == n)
    }
}

pub fn approximant_sweep(
    series: &FrobeniusSeries,
    n_max: usize,
    reference: Option<&BigFloat>,
    prec: usize,
) -> Result<Sweep, PadeError> {
    if n_max > series.order() {
        return Err(PadeError::OrderOutOfRange { requested: n_max, available: series.order() });
    }
    let mut records = Vec::with_capacity(n_max);
    let mut gaps = Vec::new();
    for n in 1..=n_max {
        match strong_coupling_approximant(series, n, prec) {
            Ok(r) => records.push(r),
            Err(PadeError::DegenerateCoefficient(n)) => gaps.push(n),
            Err(e) => return Err(e),
        }
    }
    Ok(annotate(records, gaps, reference))
}

fn annotate(records: Vec<ApproximantRecord>, gaps: Vec<usize>, reference: Option<&BigFloat>) -> Sweep {
    let mut complex_windows: Vec<ComplexWindow> = Vec::new();
    for r in records.iter().filter(|r| !r.is_real) {
        match complex_windows.last_mut() {
            Some(w) if w.end + 1 == r.n => w.end = r.n,
            _ => complex_windows.push(ComplexWindow { start: r.n, end: r.n }),
        }
    }
    let real: Vec<&ApproximantRecord> = records.iter().filter(|r| r.is_real).collect();
    let argmin = real
        .iter()
        .min_by(|a, b| a.s_n.re.partial_cmp(&b.s_n.re).expect("finite"))
        .map(|r| r.n);
    let by_order = |n: usize| records.iter().find(|r| r.n == n && r.is_real);
    let local_minima = real
        .iter()
        .filter(|r| {
            let (Some(prev), Some(next)) = (r.n.checked_sub(1).and_then(by_order), by_order(r.n + 1)) else {
                return false;
            };
            r.s_n.re < prev.s_n.re && r.s_n.re < next.s_n.re
        })
        .map(|r| r.n)
        .collect();
    let mut crossings = Vec::new();
    if let Some(reference) = reference {
        for pair in records.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if !(a.is_real && b.is_real && b.n == a.n + 1) {
                continue;
            }
            let above_a = a.s_n.re > *reference;
            let above_b = b.s_n.re > *reference;
            if above_a != above_b {
                let direction = if above_b { CrossingDirection::Upward } else { CrossingDirection::Downward };
                crossings.push(Crossing { n: b.n, direction });
            }
        }
    }
    Sweep { records, gaps, complex_windows, argmin, local_minima, crossings }
}

/// CSV with columns `N,c_N,re_S_N,im_S_N,is_real`.
pub fn sweep_to_csv(records: &[ApproximantRecord], digits: usize) -> String {
    let mut out = String::from("N,c_N,re_S_N,im_S_N,is_real\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            format_rational(&r.c_n),
            r.s_n.re.to_string_sig(digits),
            r.s_n.im.to_string_sig(digits),
            r.is_real
        ));
    }
    out
}
