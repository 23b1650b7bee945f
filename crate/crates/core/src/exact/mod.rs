//! Exact and high-precision numeric substrate.
//!
//! Everything that must cancel exactly (lattice coefficients, series
//! coefficients, binomial weights) stays in [`Rational`]. Conversion to
//! [`BigFloat`] happens only at the final scalar step.

mod float;
mod rational;
mod series;

pub use float::{principal_power, BigFloat, ComplexBigFloat, DEFAULT_PRECISION};
pub use rational::{format_rational, gen_binomial, parse_rational, Rational};
pub use series::PowerSeries;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("series must have constant term 1, found {0}")]
    NonUnitLeadingCoefficient(String),
    #[error("requested order {requested} exceeds available order {available}")]
    OrderTooHigh { requested: usize, available: usize },
    #[error("base of a rational power must be nonzero")]
    ZeroBase,
    #[error("invalid rational literal {0:?}")]
    InvalidRational(String),
}
