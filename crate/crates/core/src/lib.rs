//! Weak-coupling lattice series for two singular boundary-layer problems
//! (the instanton equation and the Blasius equation) and the machinery used
//! to push them to the continuum, strong-coupling limit.
//!
//! The crate is organised bottom-up:
//!
//! - [`exact`]: exact rationals, truncated power series, and arbitrary
//!   precision floats.
//! - [`lattice`]: generation and persistence of the coefficient tables
//!   `a_{n,j}` for both difference equations.
//! - [`pade`]: the root-of-the-surviving-coefficient approximants `S_N`.
//! - [`vpt`]: variational perturbation theory for the leading strong-coupling
//!   coefficient `b_0`.
//! - [`accel`]: Richardson extrapolation.
//! - [`large_order`]: growth-rate estimators and the Blasius sign analysis.
//! - [`oracles`]: independent continuum references.

pub mod accel;
pub mod exact;
pub mod large_order;
pub mod lattice;
pub mod oracles;
pub mod pade;
pub mod vpt;

pub use exact::{BigFloat, ComplexBigFloat, PowerSeries, Rational, DEFAULT_PRECISION};
pub use lattice::{CoefficientTable, ModelId};
