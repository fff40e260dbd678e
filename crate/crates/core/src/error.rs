use num_complex::Complex64;

/// Errors produced anywhere in the FOSLS pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular element map (det = {0:e})")]
    SingularMap(f64),

    #[error("Raviart-Thomas dual matrix is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("span dimension {span} does not match degree-of-freedom count {dofs}")]
    SpanDimension { span: usize, dofs: usize },

    #[error("data function returned a non-finite value at ({x}, {y})")]
    NonFiniteData { x: f64, y: f64 },

    #[error("non-positive pivot during Hermitian factorization")]
    NonPositivePivot,

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:.3e}")]
    CgNotConverged {
        iterations: usize,
        residual: f64,
        best: Box<Vec<Complex64>>,
    },

    #[error("eigenvalue iteration did not converge after {0} steps")]
    EigenNotConverged(usize),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
