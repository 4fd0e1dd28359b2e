use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("matrix determinant is not 1 (log-determinant {0:e})")]
    DetNotOne(f64),
    #[error("matrix is not a rotation (orthogonality defect {defect:e}, determinant {det})")]
    NotRotation { defect: f64, det: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid chamber vector: {0}")]
    NotInChamber(String),
    #[error("face index {index} is outside the simple roots 1..={rank}")]
    FaceOutOfRange { index: usize, rank: usize },
    #[error("sequence too short: {len} terms, window needs {window}")]
    TooShort { len: usize, window: usize },
    #[error("iterated refinement exceeded depth cap {0}")]
    MaxDepthExceeded(usize),
    #[error("cannot compare points of different boundary models ({0} vs {1})")]
    ModelMismatch(String, String),
    #[error("boundary point has no matrix realization")]
    IdealPoint,
    #[error("no index filter produced a fundamental subsequence")]
    Inconclusive,
    #[error("term {index}: {source}")]
    Term {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
