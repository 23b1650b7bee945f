//! Positive real roots of a polynomial with exact rational coefficients.
//!
//! Roots are bracketed by a log-spaced sign scan between Fujiwara's lower and
//! upper root bounds, then refined by bisection and safeguarded Newton steps
//! in [`BigFloat`]. The scan screens signs in a scaled `f64` evaluation and
//! falls back to full precision whenever cancellation makes the sign
//! uncertain.

use num_traits::Zero;

use crate::exact::{BigFloat, Rational};

/// Sample points per unit of `ln u`.
const SCAN_DENSITY: f64 = 128.0;
/// A scaled-f64 sign is trusted only if `|p(u)|` exceeds this fraction of
/// `sum |c_i u^i|`.
const SIGN_TRUST: f64 = 1e-9;

/// f64 mantissa with a separate binary exponent, enough for signs and
/// magnitudes far outside the f64 range.
#[derive(Clone, Copy, Debug)]
struct Scaled {
    m: f64,
    e: i64,
}

impl Scaled {
    const ZERO: Scaled = Scaled { m: 0.0, e: 0 };

    fn from_big(x: &BigFloat) -> Self {
        if x.is_zero() {
            return Self::ZERO;
        }
        // ln|x| / ln 2 splits cleanly into exponent and mantissa
        let l2 = x.abs().ln().to_f64() / std::f64::consts::LN_2;
        let e = l2.floor() as i64;
        let m = (l2 - e as f64).exp2() * x.signum() as f64;
        Scaled { m, e }
    }

    fn normalize(self) -> Self {
        if self.m == 0.0 {
            return Self::ZERO;
        }
        let k = exponent_of(self.m);
        if k.abs() < 256 {
            return self;
        }
        Scaled { m: self.m * pow2(-k), e: self.e + k }
    }

    fn mul_f64(self, u: f64) -> Self {
        Scaled { m: self.m * u, e: self.e }.normalize()
    }

    fn add(self, o: Scaled) -> Self {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let (big, small) = if self.e >= o.e { (self, o) } else { (o, self) };
        let shift = big.e - small.e;
        let m = if shift > 1000 { big.m } else { big.m + small.m * pow2(-shift) };
        Scaled { m, e: big.e }.normalize()
    }

    fn abs(self) -> Self {
        Scaled { m: self.m.abs(), e: self.e }
    }

    /// `self / other` as a plain f64 (saturating).
    fn ratio(self, other: Scaled) -> f64 {
        if other.m == 0.0 {
            return f64::INFINITY;
        }
        let d = (self.e - other.e).clamp(-1000, 1000);
        self.m / other.m * pow2(d)
    }
}

/// Unbiased binary exponent of a normal f64.
fn exponent_of(x: f64) -> i64 {
    ((x.to_bits() >> 52) & 0x7ff) as i64 - 1023
}

/// `2^k`, flushing to zero below the normal range.
fn pow2(k: i64) -> f64 {
    if k < -1022 {
        0.0
    } else {
        f64::from_bits(((k.min(1023) + 1023) as u64) << 52)
    }
}

pub(crate) struct Polynomial {
    /// coefficient of `u^i` at index `i`
    exact: Vec<Rational>,
    big: Vec<BigFloat>,
    scaled: Vec<Scaled>,
    deriv: Vec<BigFloat>,
    prec: usize,
}

impl Polynomial {
    pub(crate) fn new(exact: Vec<Rational>, prec: usize) -> Self {
        let big: Vec<BigFloat> = exact.iter().map(|c| BigFloat::from_rational(c, prec)).collect();
        let scaled = big.iter().map(Scaled::from_big).collect();
        let deriv = exact
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| BigFloat::from_rational(&(c * Rational::from_integer(i.into())), prec))
            .collect();
        Self { exact, big, scaled, deriv, prec }
    }

    pub(crate) fn eval(&self, u: &BigFloat) -> BigFloat {
        horner(&self.big, u, self.prec)
    }

    pub(crate) fn eval_deriv(&self, u: &BigFloat) -> BigFloat {
        horner(&self.deriv, u, self.prec)
    }

    /// Value and the condition sum `sum |c_i u^i|` in scaled f64.
    fn eval_scaled(&self, u: f64) -> (Scaled, Scaled) {
        let mut acc = Scaled::ZERO;
        let mut cond = Scaled::ZERO;
        for c in self.scaled.iter().rev() {
            acc = acc.mul_f64(u).add(*c);
            cond = cond.mul_f64(u).add(c.abs());
        }
        (acc, cond)
    }

    /// Bits lost when locating a root near `u`: `log2` of the condition sum
    /// over `|u p'(u)|`.
    pub(crate) fn root_loss_bits(&self, u: &BigFloat) -> f64 {
        let (_, cond) = self.eval_scaled(u.to_f64());
        let slope = Scaled::from_big(&(self.eval_deriv(u) * u));
        if slope.m == 0.0 {
            return self.prec as f64;
        }
        cond.ratio(slope).abs().log2().max(0.0)
    }

    /// Sign of `p(u)`, falling back to full precision when the scaled
    /// evaluation cannot decide it. `None` if cancellation swamps even the
    /// working precision.
    fn sign_at(&self, u: f64) -> Option<i32> {
        self.sign_at_f64(u).or_else(|| self.sign_at_big(u))
    }

    fn sign_at_f64(&self, u: f64) -> Option<i32> {
        let (v, cond) = self.eval_scaled(u);
        (v.abs().ratio(cond) > SIGN_TRUST).then_some(if v.m > 0.0 { 1 } else { -1 })
    }

    fn sign_at_big(&self, u: f64) -> Option<i32> {
        let (_, cond) = self.eval_scaled(u);
        let v = self.eval(&BigFloat::from_f64(u, self.prec));
        let bound = (self.exact.len() as f64 + 2.0) * 2f64.powi(-(self.prec as i32) + 2);
        if v.is_zero() || Scaled::from_big(&v).abs().ratio(cond) <= bound {
            return None;
        }
        Some(v.signum())
    }
}

fn horner(c: &[BigFloat], u: &BigFloat, prec: usize) -> BigFloat {
    let mut acc = BigFloat::zero(prec);
    for ci in c.iter().rev() {
        acc = &acc * u + ci;
    }
    acc
}

/// Fujiwara's bound on the moduli of the roots, as `ln` of the bound.
fn ln_fujiwara(coeffs: &[Scaled]) -> f64 {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut best = f64::NEG_INFINITY;
    for i in 1..=n {
        let c = coeffs[n - i];
        if c.m == 0.0 {
            continue;
        }
        let mut l = (c.m.abs().ln() - lead.m.abs().ln()) + (c.e - lead.e) as f64 * std::f64::consts::LN_2;
        if i == n {
            l -= std::f64::consts::LN_2;
        }
        best = best.max(l / i as f64);
    }
    best + std::f64::consts::LN_2
}

/// A sign change of the polynomial between two positive abscissae.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub sign_lo: i32,
}

/// Brackets of every positive root where the polynomial changes sign,
/// ascending. Samples whose sign cannot be resolved are skipped, so a
/// bracket may span such a stretch.
pub(crate) fn sign_changes(poly: &Polynomial) -> Vec<Bracket> {
    // strip the roots at u = 0
    let Some(lo_idx) = poly.exact.iter().position(|c| !c.is_zero()) else {
        return Vec::new();
    };
    let hi_idx = poly.exact.iter().rposition(|c| !c.is_zero()).unwrap();
    if hi_idx == lo_idx {
        return Vec::new();
    }
    let core = &poly.scaled[lo_idx..=hi_idx];
    let ln_hi = ln_fujiwara(core) + 0.01;
    let reversed: Vec<Scaled> = core.iter().rev().copied().collect();
    let ln_lo = -ln_fujiwara(&reversed) - 0.01;
    let steps = (((ln_hi - ln_lo) * SCAN_DENSITY).ceil() as usize).max(64);
    let mut out = Vec::new();
    let mut last: Option<(f64, i32)> = None;
    for i in 0..=steps {
        let u = (ln_lo + (ln_hi - ln_lo) * i as f64 / steps as f64).exp();
        let Some(s) = poly.sign_at(u) else { continue };
        if let Some((prev_u, prev_s)) = last {
            if s != prev_s {
                out.push(Bracket { lo: prev_u, hi: u, sign_lo: prev_s });
            }
        }
        last = Some((u, s));
    }
    out
}

/// Double-precision estimate of the root in a bracket. Full-precision sign
/// evaluations are capped, so badly cancelling roots stop short of f64
/// resolution.
pub(crate) fn refine_f64(poly: &Polynomial, b: &Bracket) -> f64 {
    let (mut lo, mut hi) = (b.lo, b.hi);
    let mut slow = 0;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let sign = poly.sign_at_f64(mid).or_else(|| {
            slow += 1;
            if slow > 16 {
                None
            } else {
                poly.sign_at_big(mid)
            }
        });
        match sign {
            None => break,
            Some(s) if s == b.sign_lo => lo = mid,
            Some(_) => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
fn positive_roots(poly: &Polynomial) -> Vec<BigFloat> {
    sign_changes(poly).iter().map(|b| refine(poly, b)).collect()
}

/// Bisection while the bracket is wide, then Newton steps kept inside the
/// bracket until the update is below the working precision.
pub(crate) fn refine(poly: &Polynomial, b: &Bracket) -> BigFloat {
    let prec = poly.prec;
    let mut lo = BigFloat::from_f64(b.lo, prec);
    let mut hi = BigFloat::from_f64(b.hi, prec);
    let sign_a = b.sign_lo;
    let half = BigFloat::from_f64(0.5, prec);
    let tol = BigFloat::from_i64(2, prec).powi(-(prec as i64) + 8);
    for _ in 0..40 {
        let mid = (&lo + &hi) * &half;
        let s = poly.eval(&mid).signum();
        if s == 0 {
            return mid;
        }
        if s == sign_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = (&lo + &hi) * &half;
    for _ in 0..(2 * prec) {
        let v = poly.eval(&x);
        let s = v.signum();
        if s == 0 {
            return x;
        }
        if s == sign_a {
            lo = x.clone();
        } else {
            hi = x.clone();
        }
        let d = poly.eval_deriv(&x);
        let mut next = if d.is_zero() { (&lo + &hi) * &half } else { &x - &(v / d) };
        if !(next > lo && next < hi) {
            next = (&lo + &hi) * &half;
        }
        let step = (&next - &x).abs();
        x = next;
        if step <= &tol * &x.abs() {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> Polynomial {
        Polynomial::new(c.iter().map(|&v| Rational::from_integer(v.into())).collect(), 256)
    }

    #[test]
    fn finds_simple_roots() {
        // (u - 1)(u - 2)(u - 30) = u³ - 33u² + 92u - 60
        let p = poly(&[-60, 92, -33, 1]);
        let r: Vec<f64> = positive_roots(&p).iter().map(|x| x.to_f64()).collect();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 30.0]) {
            assert!((got - want).abs() < 1e-12, "{got}");
        }
    }

    #[test]
    fn root_is_refined_to_full_precision() {
        // u² - 2
        let p = poly(&[-2, 0, 1]);
        let r = positive_roots(&p);
        assert_eq!(r.len(), 1);
        let exact = BigFloat::from_i64(2, 256).sqrt();
        let err = (&r[0] - &exact).abs();
        assert!(err < BigFloat::from_i64(2, 256).powi(-240));
    }

    #[test]
    fn ignores_negative_and_zero_roots() {
        // u (u + 1)(u - 5) = u³ - 4u² - 5u
        let p = poly(&[0, -5, -4, 1]);
        let r = positive_roots(&p);
        assert_eq!(r.len(), 1);
        assert!((r[0].to_f64() - 5.0).abs() < 1e-12);
        assert!(positive_roots(&poly(&[1, 1])).is_empty());
        assert!(positive_roots(&poly(&[3])).is_empty());
    }

    #[test]
    fn close_roots_are_separated() {
        // (u - 100)(u - 101)
        let p = poly(&[10100, -201, 1]);
        assert_eq!(positive_roots(&p).len(), 2);
    }
}
