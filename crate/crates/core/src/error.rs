use thiserror::Error;

/// Errors raised by the numerical kernels and the system-level routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KypError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {margin:e})")]
    NotPsd { margin: f64 },

    #[error("operator is outside the interval [0, I] (margins {lower:e}, {upper:e})")]
    OutsideUnitInterval { lower: f64, upper: f64 },

    #[error("operator is not a contraction (norm {norm})")]
    NotContractive { norm: f64 },

    #[error("recovered parameter {name} has norm {norm} > 1")]
    ParameterNorm { name: &'static str, norm: f64 },

    #[error("numerically singular: {0}")]
    Singular(String),

    #[error("invalid tolerances: {0}")]
    Tolerance(String),

    #[error("system is not minimal (controllable: {controllable}, observable: {observable})")]
    NotMinimal {
        controllable: bool,
        observable: bool,
    },

    #[error("routes disagree for {what}: gap {gap:e}")]
    RouteMismatch { what: &'static str, gap: f64 },

    #[error("iteration lost monotonicity at step {step} (margin {margin:e})")]
    NonMonotone { step: usize, margin: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, KypError>;
