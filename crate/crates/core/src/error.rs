//! Crate-wide error type.

use alloc::string::String;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid dimension must be 1 or 2, got {0}")]
    InvalidDimension(usize),

    #[error("grid needs at least 3 nodes per axis, got {0}")]
    GridTooSmall(usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite values in {0}")]
    NonFiniteField(&'static str),

    #[error("unknown function descriptor `{0}`")]
    UnknownDescriptor(String),

    #[error("malformed function descriptor `{0}`: {1}")]
    InvalidDescriptor(String, &'static str),

    #[error("descriptor `{0}` requires external data; resolve it before sampling")]
    DescriptorNeedsIo(String),

    #[error("invalid {name}: {value} ({requirement})")]
    InvalidExponent {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("exponents not admissible: {0}")]
    NotAdmissible(String),

    #[error("empty exponent interval ({lo}, {hi})")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("degenerate threshold constants: {0}")]
    DegenerateThresholds(&'static str),

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("linear solver stalled after {iterations} iterations (residual {residual:e})")]
    SolverStalled { iterations: usize, residual: f64 },

    #[error("adaptive quadrature exceeded its panel budget (likely a divergent integrand)")]
    QuadratureStalled,

    #[error("test function must be nonnegative; node {index} holds {value}")]
    NegativeNode { index: usize, value: f64 },

    #[error("candidate family is empty")]
    EmptyFamily,

    #[error("no family member has a nonzero normalization integral")]
    ZeroDenominator,

    #[error("invalid witness parameters: {0}")]
    InvalidWitness(String),

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;
