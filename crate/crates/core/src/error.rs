use thiserror::Error;

/// Errors raised by the orbit library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not a rotation (orthogonality residual {orth:.3e}, det {det:.6})")]
    NotRotation { orth: f64, det: f64 },

    #[error("supplied columns are not orthonormal (residual {0:.3e})")]
    NotOrthonormal(f64),

    #[error("a full orthonormal frame with determinant -1 has no free column to fix")]
    DeterminantObstruction,

    #[error("singular values are tied (relative gap {gap:.3e} below threshold)")]
    TiedSingularValues { gap: f64 },

    #[error("problem size {n} exceeds the supported maximum {max}")]
    TooLarge { n: usize, max: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("structural violation: {0}")]
    Structural(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = OrbitError> = std::result::Result<T, E>;

pub(crate) fn shape(m: &nalgebra::DMatrix<f64>) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

pub(crate) fn dim_err(context: &'static str, expected: impl ToString, found: impl ToString) -> OrbitError {
    OrbitError::Dimension {
        context,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
