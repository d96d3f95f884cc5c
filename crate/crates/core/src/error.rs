use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// Validation variants mean the input violates a contract; numerical variants
/// mean a valid input could not be processed within the configured tolerances.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum PairError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension {0} exceeds the configured maximum")]
    TooLarge(usize),
    #[error("Hermitian violation: relative residual {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("symmetry violation: relative residual {residual:.3e}")]
    NotSymmetric { residual: f64 },
    #[error("degeneracy violation: smallest relative eigenvalue {residual:.3e}")]
    Degenerate { residual: f64 },
    #[error("self-adjointness violation: relative residual {residual:.3e}")]
    NotSelfAdjoint { residual: f64 },
    #[error("singular matrix (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
    #[error("invalid block: {0}")]
    InvalidBlock(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl PairError {
    /// True for contract violations of the input, false for numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            PairError::NotSquare { .. }
                | PairError::DimensionMismatch { .. }
                | PairError::NonFinite
                | PairError::TooLarge(_)
                | PairError::NotHermitian { .. }
                | PairError::NotSymmetric { .. }
                | PairError::Degenerate { .. }
                | PairError::NotSelfAdjoint { .. }
                | PairError::InvalidBlock(_)
                | PairError::InvalidArgument(_)
        )
    }

    /// Attach context to numerical failures, leaving validation errors untouched.
    pub fn context(self, what: &str) -> PairError {
        match self {
            PairError::Numerical(m) => PairError::Numerical(format!("{what}: {m}")),
            PairError::NoConvergence(m) => PairError::NoConvergence(format!("{what}: {m}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, PairError>;
