//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by field arithmetic, matrix reductions, module
/// validation, the simplicial pipeline, and the CLI front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero in field arithmetic")]
    DivisionByZero,

    #[error("operands belong to different field specifications")]
    MixedFields,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("this operation requires the real field")]
    RealFieldRequired,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operation not defined on an empty matrix")]
    EmptyMatrix,

    #[error("SVD backend failed to converge")]
    ConvergenceFailure,

    #[error("structure map {0} has a shape inconsistent with the step dimensions")]
    ShapeMismatch(usize),

    #[error("step index {index} outside 1..={steps}")]
    IndexOutOfRange { index: usize, steps: usize },

    #[error("simplex set is not closed under faces: missing face of {0}")]
    NotClosedUnderFaces(String),

    #[error("not a subcomplex: {0} is absent from the later step")]
    NotASubcomplex(String),

    #[error("boundary maps do not form a chain complex: {0}")]
    NotAChainComplex(String),

    #[error("vector does not lie in the cycle space of the target complex")]
    NotInCycleSpace,

    #[error("Laplacian kernel dimension {kernel_dim} disagrees with the rank-based Betti number {betti}")]
    TolMismatch { kernel_dim: usize, betti: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a 1-indexed step to an error raised inside a per-step task.
    pub fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// Stable machine-readable kind, used by the CLI error envelope.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::MixedFields => "MixedFields",
            Error::NotPrime(_) => "NotPrime",
            Error::InvalidTolerance(_) => "InvalidTolerance",
            Error::RealFieldRequired => "RealFieldRequired",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::EmptyMatrix => "EmptyMatrix",
            Error::ConvergenceFailure => "ConvergenceFailure",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::NotClosedUnderFaces(_) => "NotClosedUnderFaces",
            Error::NotASubcomplex(_) => "NotASubcomplex",
            Error::NotAChainComplex(_) => "NotAChainComplex",
            Error::NotInCycleSpace => "NotInCycleSpace",
            Error::TolMismatch { .. } => "TolMismatch",
            Error::Parse(_) => "ParseError",
            Error::AtStep { source, .. } => source.kind(),
            Error::Io(_) => "IoError",
        }
    }
}
