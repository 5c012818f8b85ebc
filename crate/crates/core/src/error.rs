use thiserror::Error;

/// Errors raised by the simplex, bundle and algebra operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample space must have at least one label")]
    EmptySpace,

    #[error("duplicate label {0:?} in sample space")]
    DuplicateLabel(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("negative weight {value} at cell {cell}")]
    NegativeWeight { cell: usize, value: f64 },

    #[error("weights sum to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("non-finite value at cell {cell}")]
    NonFinite { cell: usize },

    #[error("vector is not a contrast: sum = {sum}")]
    NotContrast { sum: f64 },

    #[error("vector has nonzero expectation {mean} under its base point")]
    NotCentered { mean: f64 },

    #[error("bundle elements are based at different points")]
    BaseMismatch,

    #[error("subset of the sample space is empty")]
    EmptySubset,

    #[error("parameter {t} is outside the curve domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("no score at cell {cell}: weight {weight} but velocity {velocity}")]
    AbsoluteContinuityViolation { cell: usize, weight: f64, velocity: f64 },

    #[error("support of the source is not contained in the support of the target (cell {cell})")]
    SupportNotNested { cell: usize },

    #[error("supports differ at cell {cell}")]
    SupportMismatch { cell: usize },

    #[error("natural gradient unavailable: {0}")]
    GradientUnavailable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("flow cannot start at a vertex")]
    VertexStart,

    #[error("step rejected after {halvings} halvings at iteration {iteration}")]
    StepRejected { iteration: usize, halvings: usize },

    #[error("indeterminate {0} is not supported here")]
    UnsupportedIndeterminate(String),

    #[error("binomial exponents are equal")]
    EqualExponents,

    #[error("contrast basis has rank {rank}, expected {expected}")]
    RankDeficientBasis { rank: usize, expected: usize },

    #[error("point at t = {t} lies on the boundary (cell {cell} is zero)")]
    BoundaryPoint { t: f64, cell: usize },

    #[error("beta must be nonzero")]
    BetaZero,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
