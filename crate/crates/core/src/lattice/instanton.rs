use num_traits::Zero;

use super::{CoefficientRow, CoefficientTable, ModelId};
use crate::exact::Rational;

/// Coefficients of `δ (f_{n+1} - 2 f_n + f_{n-1}) + f_n - f_n^3 = 0` with
/// `f_0 = 0`, `f_n -> 1`, expanded as `f_n = sum_j a_{n,j} δ^j`.
///
/// Writing `f_n = 1 + g_n` for `n >= 1` gives, order by order,
/// `a_{n,j} = ½ Δ²a_{n,j-1} - (3/2) [g_n²]_j - ½ [g_n³]_j`. The square and
/// cube series of every site are cached so each order costs `O(j²)`.
/// `a_{n,j}` vanishes for `n > j`.
pub fn generate_instanton(order: usize) -> CoefficientTable {
    assert!(order >= 1, "order must be at least 1");
    let half = Rational::new(1.into(), 2.into());
    let three_half = Rational::new(3.into(), 2.into());
    let sites = order + 1;
    // g[n][k] = a_{n,k} for k >= 1 (g[n][0] = 0); n = 0 is the fixed boundary.
    let mut g = vec![vec![Rational::zero(); order + 1]; sites + 1];
    let mut sq = vec![vec![Rational::zero(); order + 1]; sites + 1];
    let mut cube = vec![vec![Rational::zero(); order + 1]; sites + 1];
    let a = |g: &Vec<Vec<Rational>>, n: usize, k: usize| -> Rational {
        if k == 0 {
            if n == 0 {
                Rational::zero()
            } else {
                Rational::from_integer(1.into())
            }
        } else {
            g[n][k].clone()
        }
    };
    let mut rows = vec![CoefficientRow::empty(0, Rational::from_integer(1.into()), Rational::zero())];
    for j in 1..=order {
        for n in 1..=j {
            let mut s2 = Rational::zero();
            for k in 1..j {
                if !g[n][k].is_zero() && !g[n][j - k].is_zero() {
                    s2 += &g[n][k] * &g[n][j - k];
                }
            }
            let mut s3 = Rational::zero();
            for k in 1..j.saturating_sub(1) {
                if !g[n][k].is_zero() && !sq[n][j - k].is_zero() {
                    s3 += &g[n][k] * &sq[n][j - k];
                }
            }
            let d2 = a(&g, n + 1, j - 1) - a(&g, n, j - 1) * Rational::from_integer(2.into())
                + a(&g, n - 1, j - 1);
            let value = &half * d2 - &three_half * &s2 - &half * &s3;
            sq[n][j] = s2;
            cube[n][j] = s3;
            g[n][j] = value;
        }
        let values = (1..=j).map(|n| g[n][j].clone()).collect();
        rows.push(CoefficientRow::new(j, 1, values, Rational::zero()));
    }
    CoefficientTable::new(ModelId::Instanton, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;
    use crate::lattice::test_support::instanton;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn leading_coefficients() {
        let t = instanton(20);
        assert_eq!(t.coeff(1, 0), r("1"));
        assert_eq!(t.coeff(0, 0), r("0"));
        assert_eq!(t.coeff(1, 1), r("-1/2"));
        assert_eq!(t.coeff(1, 2), r("1/8"));
        assert_eq!(t.coeff(1, 3), r("0"));
        assert_eq!(t.coeff(1, 4), r("11/128"));
        assert_eq!(t.coeff(1, 5), r("-23/128"));
    }

    #[test]
    fn support_triangle() {
        let t = instanton(60);
        for j in 1..=60 {
            for n in j + 1..=j + 5 {
                assert!(t.coeff(n, j).is_zero(), "a_{{{n},{j}}}");
            }
            assert_eq!(t.rows[j].support_hi, j);
        }
    }

    /// Substitutes the generated series into the difference equation and
    /// checks the residual vanishes through the generated order.
    #[test]
    fn difference_equation_residual_vanishes() {
        let order = 40;
        let t = instanton(order);
        for n in 1..=order + 1 {
            let f = t.site_series(n).truncate(order).unwrap();
            let fp = t.site_series(n + 1).truncate(order).unwrap();
            let fm = t.site_series(n - 1).truncate(order).unwrap();
            let f3 = f.mul(&f, order).unwrap().mul(&f, order).unwrap();
            for k in 0..=order {
                let mut res = f.coeff(k) - f3.coeff(k);
                if k >= 1 {
                    res += fp.coeff(k - 1) - f.coeff(k - 1) * Rational::from_integer(2.into())
                        + fm.coeff(k - 1);
                }
                assert!(res.is_zero(), "site {n} order {k}: {res}");
            }
        }
    }

    #[test]
    fn alternating_signs() {
        let t = instanton(60);
        for j in 1..=60 {
            let c = t.coeff(1, j);
            if j == 3 {
                assert!(c.is_zero());
                continue;
            }
            let expected_positive = j % 2 == 0;
            assert_eq!(c > Rational::zero(), expected_positive, "j = {j}");
        }
    }

    #[test]
    fn dyadic_denominators() {
        let t = instanton(60);
        for j in 1..=60 {
            let d = t.coeff(1, j).denom().clone();
            assert_eq!(d.clone() & (d.clone() - 1u32), 0u32.into(), "j = {j}: {d}");
        }
    }
}
