use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::ExactError;

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Formats a rational as `"num/den"`, sign on the numerator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a bare integer `"num"`. Non-reduced input is
/// normalised; a zero denominator is rejected.
pub fn parse_rational(s: &str) -> Result<Rational, ExactError> {
    let bad = || ExactError::InvalidRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Generalised binomial coefficient `alpha (alpha-1) ... (alpha-k+1) / k!`.
pub fn gen_binomial(alpha: &Rational, k: usize) -> Rational {
    // Accumulate numerator and denominator separately and reduce once.
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    let a_num = alpha.numer();
    let a_den = alpha.denom();
    for i in 0..k {
        // alpha - i = (a_num - i a_den) / a_den
        num *= a_num - a_den * BigInt::from(i);
        den *= a_den * BigInt::from(i + 1);
    }
    let g = num.gcd(&den);
    if g.is_one() {
        Rational::new_raw(num, den)
    } else {
        let (mut n, mut d) = (num / &g, den / &g);
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        Rational::new_raw(n, d)
    }
}

#[cfg(test)]
pub(crate) fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
pub(crate) fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(gen_binomial(&rat(-3, 2), 1), rat(-3, 2));
        assert_eq!(gen_binomial(&rat(-5, 2), 2), rat(35, 8));
        assert_eq!(gen_binomial(&rat(7, 3), 0), int(1));
        assert_eq!(gen_binomial(&int(5), 2), int(10));
        assert_eq!(gen_binomial(&int(5), 7), int(0));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("-23/128").unwrap(), rat(-23, 128));
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("3/-6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
        assert_eq!(format_rational(&rat(-23, 128)), "-23/128");
        assert_eq!(format_rational(&int(0)), "0/1");
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..12).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn pascal_identity(alpha in small_rational(), k in 1usize..=20) {
            let lhs = gen_binomial(&alpha, k);
            let am1 = &alpha - int(1);
            let rhs = gen_binomial(&am1, k) + gen_binomial(&am1, k - 1);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn alternating_partial_sum(alpha in small_rational(), m in 0usize..=30) {
            let mut sum = Rational::zero();
            for k in 0..=m {
                let term = gen_binomial(&alpha, k);
                if k % 2 == 0 { sum += term } else { sum -= term }
            }
            let mut rhs = gen_binomial(&(&alpha - int(1)), m);
            if m % 2 == 1 { rhs = -rhs }
            prop_assert_eq!(sum, rhs);
        }

        #[test]
        fn format_parse_roundtrip(r in small_rational()) {
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
