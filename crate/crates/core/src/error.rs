use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("variable index {index} out of range for arity {arity}")]
    VariableOutOfRange { index: usize, arity: usize },

    #[error("series diverges along variable {variable} (step monomial exponent {step:?})")]
    Divergent { variable: usize, step: Vec<i64> },

    #[error("exponent is not integral on a nonempty residue class {residue:?}")]
    NonIntegralExponent { residue: Vec<BigInt> },

    #[error("pole hit: denominator factor {factor} vanishes")]
    PoleHit { factor: String },

    #[error("infinite value not allowed here")]
    InfinityInput,

    #[error("map is not defined on the whole source: missing point {witness:?}")]
    NotTotal { witness: Vec<BigRational> },

    #[error("negative coefficient in semiring mode")]
    SemiringNegative,

    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),

    #[error("contradictory fiber data on overlapping pieces {first} and {second}")]
    ContradictoryFibers { first: usize, second: usize },

    #[error("integrality violation: {0}")]
    IntegralityViolation(String),

    #[error("matrix is not unimodular (det = {det})")]
    NonUnimodular { det: BigInt },

    #[error("range violation: {0}")]
    RangeViolation(String),

    #[error("precision {precision} too small: {reason}")]
    Precision { precision: u32, reason: String },

    #[error("fiber class not realizable: {0}")]
    Unrealizable(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}
