use thiserror::Error;

/// Everything that can go wrong while validating states, building channels or solving.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty input (dimension 0)")]
    Empty,

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("not Hermitian: max |M - M^dagger| = {0:.3e}")]
    NotHermitian(f64),

    #[error("trace is not 1: |Tr - 1| = {0:.3e}")]
    NotUnitTrace(f64),

    #[error("not positive semidefinite: smallest eigenvalue {0:.3e}")]
    NotPsd(f64),

    #[error("vector is not normalized: |norm^2 - 1| = {0:.3e}")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not a probability vector: {0}")]
    NotProbabilityVector(String),

    #[error("channel is not trace preserving: max |sum K^dagger K - I| = {0:.3e}")]
    NotCptp(f64),

    #[error("Kraus operator {0} is not in SIO normal form")]
    NotNormalForm(usize),

    #[error("zero amplitude d_{gamma} in outcome {outcome} where the target branch is nonzero")]
    DivisionByZeroAmplitude { outcome: usize, gamma: usize },

    #[error("outcome index {index} out of range (channel has {len} Kraus operators)")]
    OutcomeOutOfRange { index: usize, len: usize },

    #[error("diagonal entry {index} vanishes but its row carries off-diagonal weight {weight:.3e}")]
    SingularDiagonal { index: usize, weight: f64 },

    #[error("correlation matrix is not PSD: smallest eigenvalue {0:.3e}")]
    FactorizationFailure(f64),

    #[error("rank mismatch: state has rank {state}, isometry has {param} columns")]
    RankMismatch { state: usize, param: usize },

    #[error("isometry columns are not orthonormal: max |V^dagger V - I| = {0:.3e}")]
    InvalidIsometry(f64),

    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
