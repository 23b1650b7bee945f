//! Riemann zeta on the real axis and the convolution sums behind the
//! asymptotic consistency check for `K`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::LargeOrderError;
use crate::exact::{BigFloat, Rational};

/// Bernoulli numbers `B_0 .. B_n` from `sum_{k<=n} C(n+1, k) B_k = 0`.
fn bernoulli(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = vec![Rational::one()];
    for m in 1..=n {
        let mut acc = Rational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            acc += Rational::from_integer(binom.clone()) * bk;
            binom = binom * (m + 1 - k) / (k + 1);
        }
        b.push(-acc / Rational::from_integer((m + 1).into()));
    }
    b
}

/// `zeta(s)` for real `s > 1` by Euler–Maclaurin summation.
pub fn zeta(s: &BigFloat) -> BigFloat {
    let prec = s.precision();
    let wp = prec + 32;
    let s = s.with_precision(wp);
    let terms = 40usize;
    let n = (prec as i64 / 2 + 40).max(64);
    let one = BigFloat::one(wp);
    let mut sum = BigFloat::zero(wp);
    for k in 1..n {
        sum = sum + (-(&s) * BigFloat::from_i64(k, wp).ln()).exp();
    }
    let nf = BigFloat::from_i64(n, wp);
    let ln_n = nf.ln();
    let n_pow = |e: &BigFloat| (e * &ln_n).exp();
    sum = sum + n_pow(&(&one - &s)) / (&s - &one);
    sum = sum + n_pow(&(-(&s))) / BigFloat::from_i64(2, wp);
    let b = bernoulli(2 * terms);
    // rising = s (s+1) ... (s + 2k - 2), fact = (2k)!
    let mut rising = s.clone();
    let mut fact = BigInt::from(2);
    for k in 1..=terms {
        let coeff = BigFloat::from_rational(&(b[2 * k].clone() / Rational::from_integer(fact.clone())), wp);
        let e = -(&s) - BigFloat::from_i64(2 * k as i64 - 1, wp);
        sum = sum + coeff * &rising * n_pow(&e);
        let next = BigFloat::from_i64(2 * k as i64 - 1, wp);
        rising = rising * (&s + &next) * (&s + &next + &one);
        fact = fact * (2 * k + 1) * (2 * k + 2);
    }
    sum.with_precision(prec)
}

/// Predicted `K` from the asymptotic balance of the `n = 1` recursion,
/// `(1 + B2/(2 B1)) / (1 + 3 zeta(3/2) B1 + (3/2) zeta(3/2)^2 B1^2)`.
pub fn zeta_consistency_k(b1: &BigFloat, b2: &BigFloat) -> Result<BigFloat, LargeOrderError> {
    if !b1.is_positive() {
        return Err(LargeOrderError::NonPositiveB1);
    }
    let prec = b1.precision().max(b2.precision());
    let z = zeta(&BigFloat::from_f64(1.5, prec));
    let one = BigFloat::one(prec);
    let num = &one + &(b2 / &(BigFloat::from_i64(2, prec) * b1));
    let den = &one
        + &(BigFloat::from_i64(3, prec) * &z * b1)
        + BigFloat::from_f64(1.5, prec) * &z * &z * b1 * b1;
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convolution {
    /// `sum_k k^A (j-k)^A`
    Single,
    /// `sum_{k,l} k^A l^A (j-k-l)^A`
    Double,
}

/// Normalized finite-`j` convolution sum. For `A > -1` it is the Riemann sum
/// of `int [x(1-x)]^A` (or the double analogue); for `A < -1` the small-index
/// corners dominate and the sum is divided by `j^A`.
pub fn convolution_sum(a: f64, variant: Convolution, j: usize) -> Result<f64, LargeOrderError> {
    if j < 4 {
        return Err(LargeOrderError::OrderTooSmall);
    }
    if a == -1.0 {
        return Err(LargeOrderError::MarginalExponent);
    }
    let jf = j as f64;
    let pw: Vec<f64> = (0..j).map(|k| (k as f64).powf(a)).collect();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut add = |x: f64| {
        // Kahan summation, the terms span many magnitudes
        let y = x - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };
    match variant {
        Convolution::Single => {
            for k in 1..j {
                add(pw[k] * pw[j - k]);
            }
        }
        Convolution::Double => {
            for k in 1..j {
                for l in 1..j - k {
                    add(pw[k] * pw[l] * pw[j - k - l]);
                }
            }
        }
    }
    let scale = match (variant, a > -1.0) {
        (Convolution::Single, true) => jf.powf(-(2.0 * a + 1.0)),
        (Convolution::Double, true) => jf.powf(-(3.0 * a + 2.0)),
        (_, false) => jf.powf(-a),
    };
    Ok(sum * scale)
}

/// `j -> infinity` limit of [`convolution_sum`]: the Beta-type integrals
/// `Γ(A+1)^2/Γ(2A+2)` and `Γ(A+1)^3/Γ(3A+3)` for `A > -1`, and `2 zeta(-A)`,
/// `3 zeta(-A)^2` for `A < -1`.
pub fn convolution_limit(a: f64, variant: Convolution) -> Result<f64, LargeOrderError> {
    if a == -1.0 {
        return Err(LargeOrderError::MarginalExponent);
    }
    if a > -1.0 {
        let g = libm::tgamma(a + 1.0);
        return Ok(match variant {
            Convolution::Single => g * g / libm::tgamma(2.0 * a + 2.0),
            Convolution::Double => g * g * g / libm::tgamma(3.0 * a + 3.0),
        });
    }
    let z = zeta(&BigFloat::from_f64(-a, 128)).to_f64();
    Ok(match variant {
        Convolution::Single => 2.0 * z,
        Convolution::Double => 3.0 * z * z,
    })
}
