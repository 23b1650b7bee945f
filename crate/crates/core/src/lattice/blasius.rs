use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{CoefficientRow, CoefficientTable, ModelId};
use crate::exact::Rational;

/// One order `j >= 1` held as integer numerators over a shared denominator:
/// explicit values on sites `0..num.len()`, a constant tail beyond.
struct ScaledRow {
    num: Vec<BigInt>,
    tail: BigInt,
    den: BigInt,
    /// Numerators of `a_{n+1} - 2a_n + a_{n-1}` at index `n >= 1`; zero past
    /// the end of the vector.
    d2: Vec<BigInt>,
}

impl ScaledRow {
    fn new(num: Vec<BigInt>, tail: BigInt, den: BigInt) -> Self {
        let mut row = ScaledRow { num, tail, den, d2: Vec::new() };
        row.d2 = (0..row.num.len() + 1)
            .map(|n| {
                if n == 0 {
                    BigInt::zero()
                } else {
                    row.at(n as i64 + 1) - row.at(n as i64) * 2u32 + row.at(n as i64 - 1)
                }
            })
            .collect();
        row
    }

    /// Numerator at site `n >= -1`, using `a_{-1} = a_0`.
    fn at(&self, n: i64) -> &BigInt {
        let m = if n < 0 { (-n - 1) as usize } else { n as usize };
        self.num.get(m).unwrap_or(&self.tail)
    }

    fn to_row(&self, j: usize) -> CoefficientRow {
        let r = |v: &BigInt| Rational::new(v.clone(), self.den.clone());
        let mut values: Vec<Rational> = self.num.iter().skip(1).map(r).collect();
        let tail = r(&self.tail);
        while values.last() == Some(&tail) {
            values.pop();
        }
        if values.is_empty() {
            return CoefficientRow::empty(j, tail, Rational::zero());
        }
        CoefficientRow::new(j, 1, values, tail)
    }
}

/// Coefficients of the lattice Blasius equation
/// `2δ(f_{n+1} - 3f_n + 3f_{n-1} - f_{n-2}) + f_n(f_{n+1} - 2f_n + f_{n-1}) = 0`
/// with `f_0 = f_{-1} = 0` and `f_n ~ n`.
///
/// Order `j` solves `Δ²a_{n,j} = R_{n,j}` where
/// `R_{n,j} = -(2/n) Δ³a_{n,j-1} - (1/n) sum_{k=1}^{j-1} a_{n,k} Δ²a_{n,j-k}`.
/// Every order above zero is constant beyond a finite site, so `R` is finitely
/// supported: first differences are accumulated backwards from zero at
/// infinity and values forwards from `a_{0,j} = 0`.
///
/// Each order is assembled with integer arithmetic over one common
/// denominator and reduced once at the end.
pub fn generate_blasius(order: usize) -> CoefficientTable {
    assert!(order >= 1, "order must be at least 1");
    let mut rows = vec![CoefficientRow::empty(0, Rational::zero(), Rational::one())];
    // Order 1: the zeroth order a_{n,0} = n has Δ³ = -1 at n = 1 only, so
    // R_{1,1} = 2 and a_{n,1} = -2 for every n >= 1.
    let mut scaled: Vec<Option<ScaledRow>> = vec![None];
    scaled.push(Some(ScaledRow::new(
        vec![BigInt::zero(), BigInt::from(-2)],
        BigInt::from(-2),
        BigInt::one(),
    )));
    rows.push(scaled[1].as_ref().unwrap().to_row(1));

    for j in 2..=order {
        let get = |k: usize| scaled[k].as_ref().unwrap();
        let prev = get(j - 1);
        // common denominator for this order's source terms
        let mut common = prev.den.clone();
        for k in 1..j {
            common = common.lcm(&(&get(k).den * &get(j - k).den));
        }
        let prev_scale = &common / &prev.den;
        let factors: Vec<BigInt> =
            (0..j).map(|k| if k == 0 { BigInt::zero() } else { &common / (&get(k).den * &get(j - k).den) }).collect();

        let mut hi = prev.num.len() + 1;
        for k in 1..j {
            hi = hi.max(get(j - k).d2.len());
        }
        // t[n] = n R_n * common
        let mut t = vec![BigInt::zero(); hi + 1];
        for (n, slot) in t.iter_mut().enumerate().skip(1) {
            let ni = n as i64;
            let d3 = prev.at(ni + 1) - prev.at(ni) * 3u32 + prev.at(ni - 1) * 3u32 - prev.at(ni - 2);
            let mut acc = -(d3 * &prev_scale * 2u32);
            for k in 1..j {
                let e = match get(j - k).d2.get(n) {
                    Some(e) if !e.is_zero() => e,
                    _ => continue,
                };
                let a = get(k).at(ni);
                if a.is_zero() {
                    continue;
                }
                acc -= a * e * &factors[k];
            }
            *slot = acc;
        }
        while hi > 1 && t[hi].is_zero() {
            hi -= 1;
        }
        // R_n = t_n / (n common) = u_n / (m common) with m = lcm(1..=hi)
        let m = (1..=hi).fold(BigInt::one(), |acc, n| acc.lcm(&BigInt::from(n)));
        let u: Vec<BigInt> =
            t.iter().enumerate().map(|(n, v)| if n == 0 || n > hi { BigInt::zero() } else { v * (&m / n) }).collect();
        let mut diff: BigInt = -u[1..=hi].iter().fold(BigInt::zero(), |s, x| s + x);
        let mut num = Vec::with_capacity(hi + 2);
        num.push(BigInt::zero());
        for n in 1..=hi + 1 {
            let next = &num[n - 1] + &diff;
            num.push(next);
            if n <= hi {
                diff += &u[n];
            }
        }
        debug_assert!(diff.is_zero());
        let mut den = m * common;
        let g = num.iter().fold(den.clone(), |g, v| g.gcd(v));
        if !g.is_one() {
            for v in num.iter_mut() {
                *v = &*v / &g;
            }
            den /= &g;
        }
        let tail = num.last().unwrap().clone();
        while num.len() > 1 && num[num.len() - 1] == tail {
            num.pop();
        }
        debug_assert!(den.is_positive());
        let row = ScaledRow::new(num, tail, den);
        rows.push(row.to_row(j));
        scaled.push(Some(row));
    }
    CoefficientTable::new(ModelId::Blasius, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;
    use crate::lattice::test_support::blasius;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn leading_coefficients() {
        let t = blasius(20);
        assert_eq!(t.coeff(0, 0), r("0"));
        assert_eq!(t.coeff(3, 0), r("3"));
        assert_eq!(t.coeff(1, 1), r("-2"));
        assert_eq!(t.coeff(1, 2), r("2"));
        assert_eq!(t.coeff(1, 3), r("8/3"));
        assert_eq!(t.coeff(1, 5), r("-184/15"));
        assert_eq!(
            t.coeff(1, 20),
            r("121756993154067534451733120837029/1153217968487557347375000")
        );
        for j in 1..=20 {
            assert!(t.coeff(0, j).is_zero());
        }
    }

    #[test]
    fn difference_equation_residual_vanishes() {
        let order = 30;
        let t = blasius(order);
        let hi = t.rows[..=order].iter().map(|r| r.support_hi).max().unwrap() + 2;
        let two = Rational::from_integer(2.into());
        let three = Rational::from_integer(3.into());
        let series = |n: i64| {
            if n < 0 {
                t.site_series((-n - 1) as usize).truncate(order).unwrap()
            } else {
                t.site_series(n as usize).truncate(order).unwrap()
            }
        };
        for n in 1..=hi as i64 {
            let (fp, f, fm, fmm) = (series(n + 1), series(n), series(n - 1), series(n - 2));
            // f_{-1} = 0 at every order
            let fmm = if n == 1 { crate::exact::PowerSeries::new(vec![Rational::zero(); order + 1]) } else { fmm };
            let lap = crate::exact::PowerSeries::new(
                (0..=order).map(|k| fp.coeff(k) - &two * f.coeff(k) + fm.coeff(k)).collect(),
            );
            let prod = f.mul(&lap, order).unwrap();
            for k in 0..=order {
                let mut res = prod.coeff(k).clone();
                if k >= 1 {
                    let d3 = fp.coeff(k - 1) - &three * f.coeff(k - 1) + &three * fm.coeff(k - 1)
                        - fmm.coeff(k - 1);
                    res += &two * d3;
                }
                assert!(res.is_zero(), "site {n} order {k}");
            }
        }
    }

    #[test]
    fn signs_do_not_alternate() {
        let t = blasius(40);
        let row = t.site_row(1);
        for start in 1..=(40 - 19) {
            let alternating = (start..start + 20).all(|j| {
                let pos = row[j] > Rational::zero();
                pos == (j % 2 == 0)
            });
            assert!(!alternating, "window starting at {start}");
        }
    }

    #[test]
    fn first_order_is_constant() {
        let t = blasius(1);
        assert!(t.rows[1].support_hi < t.rows[1].support_lo);
        assert_eq!(t.rows[1].tail, r("-2"));
    }

    #[test]
    fn rows_have_constant_tails() {
        let t = blasius(40);
        for row in &t.rows[1..] {
            assert_eq!(row.support_lo, 1);
            assert_eq!(row.at(row.support_hi + 7), row.tail);
        }
    }
}
