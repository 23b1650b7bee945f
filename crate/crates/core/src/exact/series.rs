use num_traits::{One, Zero};

use super::{ExactError, Rational};

/// Truncated power series `c_0 + c_1 δ + ... + c_order δ^order` with exact
/// rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<Rational>,
}

impl PowerSeries {
    /// Builds a series from its coefficients; an empty vector becomes the
    /// order-0 zero series.
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Rational::zero());
        }
        Self { coeffs }
    }

    pub fn from_integers(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| Rational::from_integer(v.into())).collect())
    }

    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); order + 1];
        coeffs[0] = Rational::one();
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Result<Self, ExactError> {
        self.check_order(order)?;
        Ok(Self { coeffs: self.coeffs[..=order].to_vec() })
    }

    fn check_order(&self, order: usize) -> Result<(), ExactError> {
        if order > self.order() {
            return Err(ExactError::OrderTooHigh { requested: order, available: self.order() });
        }
        Ok(())
    }

    /// Cauchy product truncated at `order`.
    pub fn mul(&self, other: &Self, order: usize) -> Result<Self, ExactError> {
        self.check_order(order)?;
        other.check_order(order)?;
        let coeffs = (0..=order)
            .map(|n| {
                let mut acc = Rational::zero();
                for k in 0..=n {
                    let (a, b) = (&self.coeffs[k], &other.coeffs[n - k]);
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect();
        Ok(Self { coeffs })
    }

    /// `self^alpha` through `order` for a series with constant term 1.
    ///
    /// Uses the logarithmic-derivative recurrence
    /// `n w_n = sum_{k=1..n} ((alpha+1) k - n) u_k w_{n-k}`, `w_0 = 1`.
    pub fn pow(&self, alpha: &Rational, order: usize) -> Result<Self, ExactError> {
        self.check_order(order)?;
        if !self.coeffs[0].is_one() {
            return Err(ExactError::NonUnitLeadingCoefficient(super::format_rational(
                &self.coeffs[0],
            )));
        }
        let alpha1 = alpha + Rational::one();
        let mut w: Vec<Rational> = Vec::with_capacity(order + 1);
        w.push(Rational::one());
        // (alpha+1) k u_k is independent of n; precompute it.
        let scaled: Vec<Rational> = (0..=order)
            .map(|k| &alpha1 * Rational::from_integer(k.into()) * &self.coeffs[k])
            .collect();
        for n in 1..=order {
            let mut acc = Rational::zero();
            let nr = Rational::from_integer(n.into());
            for k in 1..=n {
                let u = &self.coeffs[k];
                if u.is_zero() || w[n - k].is_zero() {
                    continue;
                }
                let factor = &scaled[k] - &nr * u;
                acc += factor * &w[n - k];
            }
            w.push(acc / nr);
        }
        Ok(Self { coeffs: w })
    }
}
