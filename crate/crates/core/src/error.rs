use thiserror::Error;

use crate::reconstruction::Observable;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid factor dimensions {0:?}")]
    InvalidDims(Vec<usize>),

    #[error("total dimension {dim} exceeds the dense limit of {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("index {index} out of range for dimension {bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("cannot normalize the zero vector")]
    ZeroVector,

    #[error("operator is not idempotent (residual {residual:e})")]
    NotIdempotent { residual: f64 },

    #[error("postselection is orthogonal to the prepared state (overlap {overlap:e})")]
    OrthogonalPostselection { overlap: f64 },

    #[error("detection probabilities outside the reachable set (discriminant {discriminant:e})")]
    NegativeDiscriminant { discriminant: f64 },

    #[error("reference weak value vanishes; choose another reference component")]
    ZeroReferenceWeakValue,

    #[error("postselection component ({j}, {l}) vanishes; amplitudes cannot be read out")]
    VanishingPostselectionComponent { j: usize, l: usize },

    #[error("measurement plan incomplete: missing {0}")]
    IncompletePlan(Observable),

    #[error("expected {expected} Pauli expectations, found {found}")]
    ExpectationCount { expected: usize, found: usize },

    #[error("identity expectation must equal 1, found {0}")]
    IdentityExpectation(f64),

    #[error("all {trials} Monte Carlo trials were rejected")]
    AllTrialsRejected { trials: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
