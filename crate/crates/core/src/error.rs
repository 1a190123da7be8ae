use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("p = 3 unsupported")]
    CharThree,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("work estimate {required} exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("census incomplete: {0}")]
    IncompleteCensus(String),
    #[error("denominator has no unit constant term in t")]
    NonUnitConstantTerm,
    #[error("denominator is not a product of factors 1 - q^a t^b")]
    UnsupportedDenominator,
    #[error("evaluation at a pole")]
    Pole,
    #[error("outside the convergence region: {0}")]
    PoleRegion(String),
    #[error("exponent {0} is not an integer")]
    NonIntegralExponent(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not an element of the algebra: {0}")]
    NotInAlgebra(String),
    #[error("matrix is singular")]
    Singular,
    #[error("cap mismatch: {0} vs {1}")]
    CapMismatch(u64, u64),
    #[error("level m = {m} is not permissible for p = {p}, e = {e}")]
    NotPermissible { e: u32, p: u64, m: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
