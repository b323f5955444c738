use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is numerically singular (pivot norm {pivot:.3e} below {threshold:.3e})")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error(
        "generalized eigenspace of eigenvalue {re}{im:+}i has dimension {found}, expected {expected}; \
         eigenvalue clustering tolerance is probably mis-tuned"
    )]
    DefectiveTolerance {
        re: f64,
        im: f64,
        expected: usize,
        found: usize,
    },

    #[error("subspace is not invariant: lower-left residual {residual:.3e} exceeds {tol:.3e}")]
    NotInvariant { residual: f64, tol: f64 },

    #[error("no simultaneous block triangularization found (search exhausted: {search_exhausted})")]
    NotTriangularizable { search_exhausted: bool },

    #[error("no simultaneous unitary block diagonalization found")]
    NotDiagonalizable,

    #[error(
        "the adjoint-closed set triangularized but the input set failed the block-diagonal check \
         (residual {residual:.3e})"
    )]
    InternalInconsistency { residual: f64 },

    #[error(
        "every one of {candidates} commuting candidates has a single distinct eigenvalue; \
         no invertible block diagonalization found"
    )]
    OnlyScalarSpectrum { candidates: usize },

    #[error("block-diagonal verification failed: residual {residual:.3e} exceeds {tol:.3e}")]
    VerificationFailed { residual: f64, tol: f64 },

    #[error("report failed validation: {0}")]
    InvalidReport(String),

    #[error("partition sizes sum to {found}, matrix dimension is {expected}")]
    PartitionMismatch { expected: usize, found: usize },

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("duplicate matrix name `{0}`")]
    DuplicateName(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Outcomes that mean "the search found no decomposition", as opposed to
    /// malformed input or a numerical breakdown.
    pub fn is_no_decomposition(&self) -> bool {
        matches!(
            self,
            Error::NotTriangularizable { .. }
                | Error::NotDiagonalizable
                | Error::OnlyScalarSpectrum { .. }
        )
    }
}
