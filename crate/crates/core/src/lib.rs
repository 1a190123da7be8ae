//! Representation zeta functions of principal congruence subgroups of `SL3` and `SU3`
//! via exhaustive elementary-divisor enumeration, with the supporting finite-field,
//! rational-function and Dirichlet-series machinery.

pub mod dirichlet;
pub mod eldiv;
pub mod error;
pub mod finitezeta;
pub mod lattice;
pub mod modring;
pub mod orbitclass;
pub mod padicint;
pub mod poincare;
pub mod ratfun;

pub use error::{Error, Result};

/// Counting series with exact integer coefficients.
pub type CountSeries = dirichlet::DirichletSeries<u128>;
/// Series with exact rational coefficients.
pub type RationalSeries = dirichlet::DirichletSeries<num_rational::BigRational>;
/// Series with floating-point coefficients.
pub type RealSeries = dirichlet::DirichletSeries<f64>;
