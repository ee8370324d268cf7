use thiserror::Error;

/// Errors raised by the mixedstab library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("topology error in cell {cell}: {msg}")]
    Topology { cell: usize, msg: String },

    #[error("unsupported degree {degree} for {what}")]
    UnsupportedDegree { what: &'static str, degree: usize },

    #[error("matrix is not positive definite: pivot {pivot} has value {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("{dim} spurious pressure modes present; the pressure is only determined up to them (use a reduced solve)")]
    SpuriousModes { dim: usize },

    #[error("discrete kernel of the divergence form is empty")]
    EmptyKernel,

    #[error("singular system: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
