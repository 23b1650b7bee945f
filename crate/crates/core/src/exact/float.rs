use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat as Af, Consts, Radix, RoundingMode, Sign, Word};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{ExactError, Rational};

/// Mantissa bits used when no precision is specified.
pub const DEFAULT_PRECISION: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;
const WORD_BITS: i64 = Word::BITS as i64;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Binary floating-point number with a configurable mantissa length.
///
/// Binary operations run at the larger of the two operand precisions.
#[derive(Clone, Debug)]
pub struct BigFloat {
    v: Af,
    prec: usize,
}

impl BigFloat {
    fn wrap(v: Af, prec: usize) -> Self {
        Self { v, prec }
    }

    pub fn zero(prec: usize) -> Self {
        Self::wrap(Af::new(prec), prec)
    }

    pub fn one(prec: usize) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(i: i64, prec: usize) -> Self {
        Self::wrap(Af::from_i64(i, prec), prec)
    }

    pub fn from_f64(f: f64, prec: usize) -> Self {
        Self::wrap(Af::from_f64(f, prec), prec)
    }

    /// Correctly rounded conversion of an integer of any size.
    pub fn from_bigint(n: &BigInt, prec: usize) -> Self {
        let mut v = exact_bigint(n);
        v.set_precision(prec, RM).expect("precision");
        Self::wrap(v, prec)
    }

    /// Correctly rounded conversion of a rational of any size: numerator and
    /// denominator are represented exactly and divided once.
    pub fn from_rational(r: &Rational, prec: usize) -> Self {
        let n = exact_bigint(r.numer());
        if r.denom() == &BigInt::from(1) {
            let mut v = n;
            v.set_precision(prec, RM).expect("precision");
            return Self::wrap(v, prec);
        }
        let d = exact_bigint(r.denom());
        Self::wrap(n.div(&d, prec, RM), prec)
    }

    pub fn parse(s: &str, prec: usize) -> Option<Self> {
        let v = with_consts(|cc| Af::parse(s.trim(), Radix::Dec, prec, RM, cc));
        if v.is_nan() {
            None
        } else {
            Some(Self::wrap(v, prec))
        }
    }

    pub fn pi(prec: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(prec, RM)), prec)
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn with_precision(&self, prec: usize) -> Self {
        let mut v = self.v.clone();
        v.set_precision(prec, RM).expect("precision");
        Self::wrap(v, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.v.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && self.v.is_positive()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.v.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.prec)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.v.sqrt(self.prec, RM), self.prec)
    }

    pub fn ln(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.ln(self.prec, RM, cc)), self.prec)
    }

    pub fn exp(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.exp(self.prec, RM, cc)), self.prec)
    }

    pub fn cos(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.cos(self.prec, RM, cc)), self.prec)
    }

    pub fn sin(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.sin(self.prec, RM, cc)), self.prec)
    }

    pub fn tanh(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.tanh(self.prec, RM, cc)), self.prec)
    }

    /// Integer power; negative exponents go through the reciprocal.
    pub fn powi(&self, n: i64) -> Self {
        let p = self.v.powi(n.unsigned_abs() as usize, self.prec + 32, RM);
        let mut v = if n < 0 { p.reciprocal(self.prec + 32, RM) } else { p };
        v.set_precision(self.prec, RM).expect("precision");
        Self::wrap(v, self.prec)
    }

    /// Real power of a positive base.
    pub fn powf(&self, e: &Self) -> Self {
        let prec = self.prec.max(e.prec);
        Self::wrap(with_consts(|cc| self.v.pow(&e.v, prec, RM, cc)), prec)
    }

    /// Real `q`-th root of a positive number.
    pub fn root(&self, q: u32) -> Self {
        match q {
            1 => self.clone(),
            2 => self.sqrt(),
            _ => (self.ln() / Self::from_i64(q as i64, self.prec)).exp(),
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Exact value as a rational.
    pub fn to_rational(&self) -> Rational {
        let Some((words, _, sign, e, _)) = self.v.as_raw_parts() else {
            panic!("non-finite BigFloat has no rational value");
        };
        if self.is_zero() {
            return Rational::zero();
        }
        let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        let mut m = BigInt::from(BigUint::from_bytes_le(&bytes));
        if sign == Sign::Neg {
            m = -m;
        }
        let shift = e as i64 - WORD_BITS * words.len() as i64;
        if shift >= 0 {
            Rational::from_integer(m << shift as usize)
        } else {
            Rational::new(m, BigInt::from(1) << (-shift) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let Some((words, _, sign, e, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        let top = *words.last().unwrap() as f64;
        let v = top * 2f64.powi((e as i64 - WORD_BITS).clamp(-2000, 2000) as i32);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    /// Approximate base-10 exponent, valid far outside the f64 range.
    fn log10_estimate(&self) -> f64 {
        let (words, _, _, e, _) = self.v.as_raw_parts().expect("finite");
        let top = *words.last().unwrap() as f64 / 2f64.powi(WORD_BITS as i32);
        top.log10() + e as f64 * std::f64::consts::LOG10_2
    }

    /// Decimal rendering with `sig` significant digits (round half to even).
    /// Plain positional notation is used for moderate exponents.
    pub fn to_string_sig(&self, sig: usize) -> String {
        if !self.is_finite() {
            return "NaN".into();
        }
        if self.is_zero() {
            return "0".into();
        }
        let sig = sig.max(1);
        let x = self.to_rational();
        let mut d = self.log10_estimate().floor() as i64;
        let (digits, d) = loop {
            let scaled = scale10(&x, sig as i64 - 1 - d);
            let q = round_half_even(&scaled);
            let len = q.abs().to_string().len();
            if len > sig {
                d += 1;
            } else if len < sig {
                d -= 1;
            } else {
                break (q, d);
            }
        };
        let neg = digits.is_negative();
        let s = digits.abs().to_string();
        let body = if (-25..=25).contains(&d) {
            if d >= 0 {
                let int_len = d as usize + 1;
                if int_len >= s.len() {
                    format!("{}{}", s, "0".repeat(int_len - s.len()))
                } else {
                    format!("{}.{}", &s[..int_len], &s[int_len..])
                }
            } else {
                format!("0.{}{}", "0".repeat((-d - 1) as usize), s)
            }
        } else if s.len() > 1 {
            format!("{}.{}e{}", &s[..1], &s[1..], d)
        } else {
            format!("{}e{}", s, d)
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }

    /// Number of decimal digits the mantissa carries.
    pub fn decimal_digits(&self) -> usize {
        ((self.prec as f64) * std::f64::consts::LOG10_2).floor() as usize
    }
}

fn exact_bigint(n: &BigInt) -> Af {
    if n.is_zero() {
        return Af::new(64);
    }
    // limb width differs between 64-bit hosts and wasm32
    const W: usize = std::mem::size_of::<Word>();
    let mut bytes = n.magnitude().to_bytes_le();
    bytes.resize(bytes.len().div_ceil(W) * W, 0);
    let words: Vec<Word> = bytes.chunks(W).map(|c| Word::from_le_bytes(c.try_into().expect("limb"))).collect();
    let e = WORD_BITS * words.len() as i64;
    let sign = if n.is_negative() { Sign::Neg } else { Sign::Pos };
    Af::from_words(&words, sign, e as i32)
}

fn scale10(x: &Rational, k: i64) -> Rational {
    let p = BigInt::from(10).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        x * Rational::from_integer(p)
    } else {
        x / Rational::from_integer(p)
    }
}

fn round_half_even(x: &Rational) -> BigInt {
    let (q, r) = x.numer().div_mod_floor(x.denom());
    let twice: BigInt = r * 2u32;
    match twice.cmp(x.denom()) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().unwrap_or_else(|| self.decimal_digits());
        f.write_str(&self.to_string_sig(sig))
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.v.cmp(&other.v) == Some(0)
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: &BigFloat) -> BigFloat {
                let prec = self.prec.max(rhs.prec);
                BigFloat::wrap(self.v.$m(&rhs.v, prec, RM), prec)
            }
        }
        impl $tr<BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: BigFloat) -> BigFloat {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: &BigFloat) -> BigFloat {
                (&self).$m(rhs)
            }
        }
        impl $tr<BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: BigFloat) -> BigFloat {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat::wrap(Af::neg(&self.v), self.prec)
    }
}

impl Neg for &BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat::wrap(Af::neg(&self.v), self.prec)
    }
}

/// Complex value on top of [`BigFloat`]; `im == 0` marks a real value.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexBigFloat {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl ComplexBigFloat {
    pub fn real(re: BigFloat) -> Self {
        let prec = re.precision();
        Self { re, im: BigFloat::zero(prec) }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn norm(&self) -> BigFloat {
        (&self.re * &self.re + &self.im * &self.im).sqrt()
    }
}

impl fmt::Display for ComplexBigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().unwrap_or_else(|| self.re.decimal_digits());
        if self.is_real() {
            return f.write_str(&self.re.to_string_sig(sig));
        }
        let im = self.im.to_string_sig(sig);
        let sep = if im.starts_with('-') { "" } else { "+" };
        write!(f, "{}{}{}i", self.re.to_string_sig(sig), sep, im)
    }
}

/// Natural log of a positive integer of any size: the integer is first
/// rounded to `prec + 64` bits so the cost does not depend on its length.
fn ln_bigint(n: &BigInt, prec: usize) -> BigFloat {
    BigFloat::from_bigint(n, prec + 64).ln().with_precision(prec)
}

/// `c^e = exp(e log c)` on the principal branch (`log c = ln|c| + iπ` for
/// negative `c`).
pub fn principal_power(c: &Rational, e: &Rational, prec: usize) -> Result<ComplexBigFloat, ExactError> {
    if c.is_zero() {
        return Err(ExactError::ZeroBase);
    }
    let wp = prec + 64;
    let ln_abs = ln_bigint(&c.numer().abs(), wp) - ln_bigint(c.denom(), wp);
    let e_f = BigFloat::from_rational(e, wp);
    let mag = (&e_f * &ln_abs).exp();
    if c.is_positive() {
        return Ok(ComplexBigFloat::real(mag.with_precision(prec)));
    }
    let angle = &e_f * &BigFloat::pi(wp);
    let re = (&mag * &angle.cos()).with_precision(prec);
    let im = (&mag * &angle.sin()).with_precision(prec);
    Ok(ComplexBigFloat { re, im })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};

    fn close(a: &BigFloat, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() < tol
    }

    #[test]
    fn rational_round_trip_is_exact() {
        for r in [rat(-23, 128), rat(3, 1), int(0), rat(1, 1 << 40)] {
            assert_eq!(BigFloat::from_rational(&r, 256).to_rational(), r);
        }
    }

    #[test]
    fn huge_rational_conversion() {
        // (10^5000 + 10^4990) / 10^5000 = 1 + 1e-10; 10^5000/(10^5000+1) rounds to 1
        let big = BigInt::from(10).pow(5000);
        let r = Rational::new(&big + BigInt::from(10).pow(4990), big.clone());
        let f = BigFloat::from_rational(&r, 256);
        assert_eq!(f.to_string_sig(12), "1.00000000010");
        let r = Rational::new(big.clone(), big + 1);
        assert_eq!(BigFloat::from_rational(&r, 256), BigFloat::one(256));
        let huge = Rational::from_integer(BigInt::from(7).pow(100_000));
        let l = BigFloat::from_rational(&huge, 256).ln();
        assert!(close(&l, 100_000.0 * 7f64.ln(), 1e-6));
    }

    #[test]
    fn formatting() {
        let x = BigFloat::from_rational(&rat(1, 3), 256);
        assert_eq!(x.to_string_sig(10), "0.3333333333");
        assert_eq!(BigFloat::from_i64(-125, 128).to_string_sig(2), "-120");
        assert_eq!(BigFloat::from_i64(1234567, 128).to_string_sig(3), "1230000");
        assert_eq!(BigFloat::from_rational(&rat(7, 1000), 128).to_string_sig(3), "0.00700");
        assert_eq!(BigFloat::from_i64(10, 128).powi(40).to_string_sig(3), "1.00e40");
        assert_eq!(BigFloat::from_f64(0.99996, 128).to_string_sig(3), "1.00");
    }

    #[test]
    fn parse_matches_rational() {
        let a = BigFloat::parse("0.125", 256).unwrap();
        assert_eq!(a.to_rational(), rat(1, 8));
        assert!(BigFloat::parse("abc", 256).is_none());
    }

    #[test]
    fn principal_power_examples() {
        let s2 = principal_power(&int(2), &rat(-1, 4), 256).unwrap();
        assert!(s2.is_real());
        assert_eq!(s2.re.to_string_sig(10), "0.8408964153");

        let s3 = principal_power(&rat(35, 8), &rat(-1, 6), 256).unwrap();
        assert_eq!(s3.re.to_string_sig(9), "0.781934407");

        let i2 = principal_power(&int(-4), &rat(1, 2), 256).unwrap();
        assert!(!i2.is_real());
        assert!(i2.re.abs().to_f64() < 1e-70);
        assert!(close(&i2.im, 2.0, 1e-70));

        assert_eq!(principal_power(&int(0), &int(1), 256), Err(ExactError::ZeroBase));
    }

    #[test]
    fn principal_power_agrees_with_exp_log() {
        let cases = [(rat(3, 7), rat(5, 3)), (rat(1001, 10), rat(-2, 9)), (int(2), rat(1, 2))];
        for (c, e) in cases {
            let p = principal_power(&c, &e, 256).unwrap().re;
            let direct = (BigFloat::from_rational(&e, 256) * BigFloat::from_rational(&c, 256).ln()).exp();
            let diff = (&p - &direct).abs();
            let ulp = direct.abs() * BigFloat::from_i64(2, 256).powi(-255);
            assert!(diff <= &ulp + &ulp, "{c} ^ {e}");
        }
    }

    #[test]
    fn astronomical_base() {
        let c = Rational::from_integer(BigInt::from(3).pow(200_000));
        let p = principal_power(&c, &rat(-1, 200_000), 256).unwrap();
        assert!(close(&p.re, 1.0 / 3.0, 1e-14));
    }
}
