use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series has zero constant term and cannot be inverted")]
    ZeroConstantTerm,
    #[error("series must have at least one coefficient")]
    EmptySeries,
    #[error("part count {parts} outside 1..={degree}")]
    InvalidPartCount { parts: usize, degree: usize },
    #[error("degree {degree} exceeds truncation degree {max}")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("multi-index must be nonzero")]
    ZeroIndex,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point lies outside the open unit ball")]
    OutsideBall,
    #[error("|z||w| = {rho} exceeds the radius limit {limit}")]
    RadiusAboveLimit { rho: f64, limit: f64 },
    #[error("tail estimate unreliable: rho * ratio = {0} >= 1")]
    UnreliableTail(f64),
    #[error("kernel is not CNP: b_{index} < 0")]
    NotCnp { index: usize },
    #[error("inner series has modulus {0} >= 1")]
    SeriesBoundViolated(f64),
    #[error("coefficient identities need exact rational values")]
    NonRationalValues,
    #[error("exponent must be at least 1")]
    InvalidExponent,
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid functional: {0}")]
    InvalidFunctional(String),
}
