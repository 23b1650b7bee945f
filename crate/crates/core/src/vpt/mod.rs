//! Variational perturbation theory for the leading strong-coupling
//! coefficient.
//!
//! With weak-coupling coefficients `f_n` and scaling exponents `p`, `q`,
//!
//! ```text
//! b0(N)(k0) = sum_{n=0..N} (-1)^{N-n} binom((p - nq)/2 - 1, N - n) f_n k0^{p - nq}
//! ```
//!
//! and `k0` is fixed by the principle of least sensitivity. Multiplying the
//! `d`-th derivative by `k0^{Nq - p + d}` turns it into a polynomial of degree
//! `N` in `u = k0^q` with exact coefficients, whose positive roots are
//! isolated by a sign scan.

mod roots;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{gen_binomial, BigFloat, Rational};
use roots::{refine, refine_f64, sign_changes, Polynomial};

/// Extra bits carried beyond the requested precision.
const GUARD_BITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VptError {
    #[error("k0 must be positive")]
    NonPositiveK0,
    #[error("no positive root of the derivative polynomial at N = {0}")]
    NoRoot(usize),
    #[error("first-order formula is singular (p in {{0, 2}} or f0 = 0)")]
    SingularFormula,
    #[error("first-order radicand is not positive")]
    NegativeRadicand,
    #[error("order N = {requested} outside 0..={available}")]
    OrderOutOfRange { requested: usize, available: usize },
    #[error("q must be positive")]
    InvalidExponent,
    #[error("derivative order must be at least 1, got {0}")]
    InvalidDerivative(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Largest zero of the first derivative.
    Extremum,
    /// Largest zero of the second derivative.
    RightmostInflection,
    /// Largest zero of the `d`-th derivative, `d >= 3`. The Blasius
    /// reference values come from `d = 4`.
    HigherDerivative(usize),
}

impl Strategy {
    pub fn derivative(self) -> usize {
        match self {
            Strategy::Extremum => 1,
            Strategy::RightmostInflection => 2,
            Strategy::HigherDerivative(d) => d,
        }
    }

    /// The strategy selecting the largest zero of the `d`-th derivative.
    pub fn for_derivative(d: usize) -> Option<Self> {
        match d {
            0 => None,
            1 => Some(Strategy::Extremum),
            2 => Some(Strategy::RightmostInflection),
            d => Some(Strategy::HigherDerivative(d)),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Extremum => "extremum",
            Strategy::RightmostInflection => "rightmost-inflection",
            Strategy::HigherDerivative(d) => return write!(f, "derivative-{d}"),
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "extremum" => Ok(Strategy::Extremum),
            "rightmost-inflection" | "inflection" => Ok(Strategy::RightmostInflection),
            other => other
                .strip_prefix("derivative-")
                .and_then(|d| d.parse().ok())
                .and_then(Strategy::for_derivative)
                .ok_or_else(|| {
                    format!("unknown strategy {other:?} (expected extremum, rightmost-inflection or derivative-<d>)")
                }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VptProblem {
    f: Vec<Rational>,
    p: i64,
    q: u32,
}

impl VptProblem {
    pub fn new(f: Vec<Rational>, p: i64, q: u32) -> Result<Self, VptError> {
        if q == 0 {
            return Err(VptError::InvalidExponent);
        }
        Ok(Self { f, p, q })
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.f
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Highest order the coefficients support.
    pub fn max_order(&self) -> usize {
        self.f.len().saturating_sub(1)
    }

    fn check_order(&self, n: usize) -> Result<(), VptError> {
        if self.f.is_empty() || n > self.max_order() {
            return Err(VptError::OrderOutOfRange { requested: n, available: self.max_order() });
        }
        Ok(())
    }

    fn exponent(&self, n: usize) -> i64 {
        self.p - n as i64 * self.q as i64
    }

    /// `(-1)^{N-n} binom((p - nq)/2 - 1, N - n) f_n` for `n = 0..=N`.
    fn term_coefficients(&self, order: usize) -> Vec<Rational> {
        (0..=order)
            .map(|n| {
                let alpha = Rational::new(self.exponent(n).into(), 2.into()) - Rational::from_integer(1.into());
                let c = gen_binomial(&alpha, order - n) * &self.f[n];
                if (order - n) % 2 == 1 {
                    -c
                } else {
                    c
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct VptResult {
    pub n: usize,
    pub k0: BigFloat,
    pub b0: BigFloat,
    pub strategy: Strategy,
    /// Every positive zero of the selected derivative, ascending in `k0`.
    /// All but the selected one are double-precision estimates.
    pub candidates: Vec<BigFloat>,
}

fn falling(e: i64, d: usize) -> i64 {
    (0..d as i64).map(|i| e - i).product()
}

/// Sums `terms(prec)` and repeats at higher precision when the sum cancels
/// more than the guard bits allow.
fn stable_sum(prec: usize, terms: impl Fn(usize) -> Vec<BigFloat>) -> BigFloat {
    let mut wp = prec + GUARD_BITS;
    loop {
        let t = terms(wp);
        let mut sum = BigFloat::zero(wp);
        let mut max = BigFloat::zero(wp);
        for x in &t {
            sum = &sum + x;
            max = max.max(x.abs());
        }
        let lost = if sum.is_zero() {
            if max.is_zero() {
                0
            } else {
                wp
            }
        } else {
            (max / sum.abs()).ln().to_f64().max(0.0) as usize * 3 / 2 + 1
        };
        if lost + prec <= wp || wp > 16 * prec + 4096 {
            return sum.with_precision(prec);
        }
        wp = prec + lost + GUARD_BITS;
    }
}

/// `b0(N)` at a given `k0`.
pub fn vpt_b0(problem: &VptProblem, order: usize, k0: &BigFloat) -> Result<BigFloat, VptError> {
    vpt_b0_deriv_any(problem, order, k0, 0)
}

/// `d`-th derivative of `b0(N)` with respect to `k0`, `d >= 1`.
pub fn vpt_b0_deriv(problem: &VptProblem, order: usize, k0: &BigFloat, d: usize) -> Result<BigFloat, VptError> {
    if d == 0 {
        return Err(VptError::InvalidDerivative(d));
    }
    vpt_b0_deriv_any(problem, order, k0, d)
}

fn vpt_b0_deriv_any(problem: &VptProblem, order: usize, k0: &BigFloat, d: usize) -> Result<BigFloat, VptError> {
    problem.check_order(order)?;
    if !k0.is_positive() {
        return Err(VptError::NonPositiveK0);
    }
    let t = problem.term_coefficients(order);
    let prec = k0.precision();
    Ok(stable_sum(prec, |wp| {
        let k = k0.with_precision(wp);
        t.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| {
                let e = problem.exponent(n);
                let c = c * Rational::from_integer(falling(e, d).into());
                BigFloat::from_rational(&c, wp) * k.powi(e - d as i64)
            })
            .collect()
    }))
}

/// Coefficients of `k0^{Nq - p + d} * b0^{(d)}(k0)` as a polynomial in
/// `u = k0^q`, lowest power first.
pub fn derivative_polynomial(problem: &VptProblem, order: usize, d: usize) -> Result<Vec<Rational>, VptError> {
    problem.check_order(order)?;
    let t = problem.term_coefficients(order);
    let mut out = vec![Rational::zero(); order + 1];
    for (n, c) in t.into_iter().enumerate() {
        out[order - n] = c * Rational::from_integer(falling(problem.exponent(n), d).into());
    }
    Ok(out)
}

pub fn optimal_k0(problem: &VptProblem, order: usize, strategy: Strategy, prec: usize) -> Result<VptResult, VptError> {
    if order == 0 {
        return Err(VptError::OrderOutOfRange { requested: 0, available: problem.max_order() });
    }
    if strategy.derivative() == 0 {
        return Err(VptError::InvalidDerivative(0));
    }
    let coeffs = derivative_polynomial(problem, order, strategy.derivative())?;
    let scan = Polynomial::new(coeffs.clone(), prec + GUARD_BITS);
    let brackets = sign_changes(&scan);
    let Some(last) = brackets.last() else {
        return Err(VptError::NoRoot(order));
    };
    // the scan precision may not resolve an ill-conditioned root
    let rough = refine(&scan, last);
    let loss = scan.root_loss_bits(&rough).ceil() as usize;
    let poly = if loss > GUARD_BITS / 2 { Polynomial::new(coeffs, prec + GUARD_BITS + loss) } else { scan };
    let q = problem.q;
    let k0 = refine(&poly, last).root(q);
    let b0 = vpt_b0(problem, order, &k0)?.with_precision(prec);
    let k0 = k0.with_precision(prec);
    // only the selected root is needed to full precision
    let mut candidates: Vec<BigFloat> = brackets[..brackets.len() - 1]
        .iter()
        .map(|b| BigFloat::from_f64(refine_f64(&poly, b).powf(1.0 / q as f64), prec))
        .collect();
    candidates.push(k0.clone());
    Ok(VptResult { n: order, k0, b0, strategy, candidates })
}

/// Closed-form extremum of the first-order expression.
pub fn first_order_k0(problem: &VptProblem, prec: usize) -> Result<BigFloat, VptError> {
    problem.check_order(1)?;
    let (p, q) = (problem.p, problem.q as i64);
    if p == 0 || p == 2 || problem.f[0].is_zero() {
        return Err(VptError::SingularFormula);
    }
    let radicand = Rational::from_integer((2 * (p - q)).into()) * &problem.f[1]
        / (&problem.f[0] * Rational::from_integer((p * (p - 2)).into()));
    if !radicand.is_positive() {
        return Err(VptError::NegativeRadicand);
    }
    Ok(BigFloat::from_rational(&radicand, prec).root(problem.q))
}

#[derive(Debug, Clone)]
pub struct VptSequence {
    pub results: Vec<VptResult>,
    /// Orders that produced no result, with the reason.
    pub gaps: Vec<(usize, VptError)>,
}

impl VptSequence {
    pub fn b0_values(&self) -> Vec<BigFloat> {
        self.results.iter().map(|r| r.b0.clone()).collect()
    }
}

/// Optimizes every order `1..=n_max`, fanning out over `jobs` threads.
pub fn vpt_sequence(
    problem: &VptProblem,
    n_max: usize,
    strategy: Strategy,
    prec: usize,
    jobs: usize,
) -> Result<VptSequence, VptError> {
    problem.check_order(n_max)?;
    let slots: Vec<Mutex<Option<Result<VptResult, VptError>>>> = (0..n_max).map(|_| Mutex::new(None)).collect();
    // largest orders first, they are the slowest
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n_max {
                    break;
                }
                let order = n_max - i;
                let r = optimal_k0(problem, order, strategy, prec);
                *slots[order - 1].lock().unwrap() = Some(r);
            });
        }
    });
    let mut results = Vec::new();
    let mut gaps = Vec::new();
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.into_inner().unwrap().expect("every order computed") {
            Ok(r) => results.push(r),
            Err(e) => gaps.push((i + 1, e)),
        }
    }
    Ok(VptSequence { results, gaps })
}

/// CSV with columns `N,k0,b0,strategy`.
pub fn sequence_to_csv(results: &[VptResult], digits: usize) -> String {
    let mut out = String::from("N,k0,b0,strategy\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            r.k0.to_string_sig(digits),
            r.b0.to_string_sig(digits),
            r.strategy
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::test_support::{blasius, instanton};

    const PREC: usize = 256;

    fn inst(order: usize) -> VptProblem {
        VptProblem::new(instanton(60).site_row(1)[..=order].to_vec(), -1, 2).unwrap()
    }

    fn blas(order: usize) -> VptProblem {
        VptProblem::new(blasius(40).site_row(1)[..=order].to_vec(), -2, 4).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x.into())).collect()
    }

    fn big(x: f64) -> BigFloat {
        BigFloat::from_f64(x, PREC)
    }

    fn close(a: &BigFloat, b: &BigFloat, rel: f64) -> bool {
        let d = (a - b).abs();
        d <= b.abs() * BigFloat::from_f64(rel, PREC)
    }

    #[test]
    fn first_order_instanton() {
        let p = inst(1);
        assert_eq!(vpt_b0(&p, 1, &big(1.0)).unwrap().to_string_sig(20), "1.0000000000000000000");
        assert!(vpt_b0_deriv(&p, 1, &big(1.0), 1).unwrap().abs() < big(1e-70));
        let r = optimal_k0(&p, 1, Strategy::Extremum, PREC).unwrap();
        assert_eq!(r.k0.to_string_sig(30), "1.00000000000000000000000000000");
        assert_eq!(r.b0.to_string_sig(30), "1.00000000000000000000000000000");
        let seed = first_order_k0(&p, PREC).unwrap();
        assert!(close(&seed, &r.k0, 1e-70));
    }

    #[test]
    fn first_order_blasius() {
        let p = blas(1);
        let k0 = BigFloat::from_i64(3, PREC).root(4);
        assert!(vpt_b0_deriv(&p, 1, &k0, 1).unwrap().abs() < big(1e-70));
        let expected = BigFloat::from_i64(4, PREC) / (BigFloat::from_i64(3, PREC) * BigFloat::from_i64(3, PREC).sqrt());
        assert!(close(&vpt_b0(&p, 1, &k0).unwrap(), &expected, 1e-70));
        assert_eq!(expected.to_string_sig(5), "0.76980");
        let r = optimal_k0(&p, 1, Strategy::Extremum, PREC).unwrap();
        assert!(close(&r.k0, &k0, 1e-70));
        assert!(close(&first_order_k0(&p, PREC).unwrap(), &k0, 1e-70));
    }

    #[test]
    fn zeroth_order_derivative_is_single_term() {
        let p = inst(3);
        let k0 = big(2.5);
        let d = vpt_b0_deriv(&p, 0, &k0, 1).unwrap();
        let expected = BigFloat::from_i64(-1, PREC) * k0.powi(-2);
        assert!(close(&d, &expected, 1e-70));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = inst(3);
        assert_eq!(vpt_b0(&p, 2, &big(0.0)), Err(VptError::NonPositiveK0));
        assert_eq!(vpt_b0(&p, 2, &big(-1.0)), Err(VptError::NonPositiveK0));
        assert!(matches!(vpt_b0(&p, 4, &big(1.0)), Err(VptError::OrderOutOfRange { .. })));
        assert_eq!(vpt_b0_deriv(&p, 2, &big(1.0), 0), Err(VptError::InvalidDerivative(0)));
        let bad = VptProblem::new(ints(&[1, 1]), 2, 2).unwrap();
        assert_eq!(first_order_k0(&bad, PREC), Err(VptError::SingularFormula));
        let neg = VptProblem::new(ints(&[1, 1]), -1, 2).unwrap();
        assert_eq!(first_order_k0(&neg, PREC), Err(VptError::NegativeRadicand));
        assert!(VptProblem::new(vec![], -1, 0).is_err());
        // b0 = -2 k0^-2 + f1 k0^-6 with f1 = 0 has no stationary point
        let flat = VptProblem::new(ints(&[1, 0]), -2, 4).unwrap();
        assert_eq!(optimal_k0(&flat, 1, Strategy::Extremum, PREC).unwrap_err(), VptError::NoRoot(1));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = inst(50);
        let h = BigFloat::from_i64(2, PREC).powi(-60);
        for (order, k) in [(5, 0.7), (20, 3.3), (50, 11.0), (37, 27.5)] {
            let k0 = big(k);
            let plus = vpt_b0(&p, order, &(&k0 + &h)).unwrap();
            let minus = vpt_b0(&p, order, &(&k0 - &h)).unwrap();
            let fd = (plus - minus) / (BigFloat::from_i64(2, PREC) * &h);
            let d = vpt_b0_deriv(&p, order, &k0, 1).unwrap();
            assert!(close(&fd, &d, 1e-20), "N={order}");
        }
    }

    #[test]
    fn polynomial_reduction_matches_direct_evaluation() {
        for (p, order) in [(inst(40), 40), (blas(30), 30)] {
            for d in 1..=2 {
                let coeffs = derivative_polynomial(&p, order, d).unwrap();
                let poly = Polynomial::new(coeffs, PREC + 128);
                for k in [0.9, 4.0, 13.0] {
                    let k0 = big(k);
                    let u = k0.with_precision(PREC + 128).powi(p.q() as i64);
                    let scale = k0.powi(p.p() - order as i64 * p.q() as i64 - d as i64);
                    let via_poly = (poly.eval(&u) * scale).with_precision(PREC);
                    let direct = vpt_b0_deriv(&p, order, &k0, d).unwrap();
                    assert!(close(&via_poly, &direct, 1e-70), "N={order} d={d} k0={k}");
                }
            }
        }
    }

    #[test]
    fn selected_root_is_certified() {
        for (p, order) in [(inst(60), 60), (blas(40), 40)] {
            let r = optimal_k0(&p, order, Strategy::RightmostInflection, PREC).unwrap();
            let d2 = vpt_b0_deriv(&p, order, &r.k0, 2).unwrap();
            assert!(d2.abs() < r.b0.abs() * big(1e-30));
            let eps = BigFloat::from_f64(1e-6, PREC);
            let left = vpt_b0_deriv(&p, order, &(&r.k0 * (BigFloat::one(PREC) - &eps)), 2).unwrap();
            let right = vpt_b0_deriv(&p, order, &(&r.k0 * (BigFloat::one(PREC) + &eps)), 2).unwrap();
            assert_ne!(left.signum(), right.signum());
            assert!(r.candidates.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(r.candidates.last(), Some(&r.k0));
        }
    }

    #[test]
    fn strategy_names_roundtrip() {
        for s in [Strategy::Extremum, Strategy::RightmostInflection, Strategy::HigherDerivative(4)] {
            assert_eq!(s.to_string().parse::<Strategy>(), Ok(s));
            assert_eq!(Strategy::for_derivative(s.derivative()), Some(s));
        }
        assert!("derivative-0".parse::<Strategy>().is_err());
        assert!("steepest".parse::<Strategy>().is_err());
    }

    #[test]
    fn higher_derivative_root_is_certified() {
        let p = blas(40);
        let r = optimal_k0(&p, 40, Strategy::HigherDerivative(4), PREC).unwrap();
        let d4 = vpt_b0_deriv(&p, 40, &r.k0, 4).unwrap();
        assert!(d4.abs() < r.b0.abs() * big(1e-30));
        let d3 = vpt_b0_deriv(&p, 40, &r.k0, 3).unwrap();
        assert!(!d3.is_zero());
    }

    #[test]
    fn sequence_and_csv() {
        let p = inst(12);
        let seq = vpt_sequence(&p, 12, Strategy::RightmostInflection, PREC, 3).unwrap();
        assert_eq!(seq.results.len() + seq.gaps.len(), 12);
        assert!(seq.results.windows(2).all(|w| w[0].n < w[1].n));
        let serial = vpt_sequence(&p, 12, Strategy::RightmostInflection, PREC, 1).unwrap();
        assert_eq!(sequence_to_csv(&seq.results, 20), sequence_to_csv(&serial.results, 20));
        assert!(sequence_to_csv(&seq.results, 8).starts_with("N,k0,b0,strategy\n"));
    }
}
