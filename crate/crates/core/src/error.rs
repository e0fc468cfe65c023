use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("eigenvalues too close to treat as simple: min gap {min_gap:e} <= tolerance {tol:e}")]
    DefectiveInput { min_gap: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tridiagonal reference requires nonzero off-diagonals")]
    ZeroOffdiagonal,

    #[error("projection onto the structure vanishes (norm {norm:e})")]
    ZeroProjection { norm: f64 },

    #[error("overlap y^H x of eigenvalue {index} vanishes")]
    VanishingOverlap { index: usize },

    #[error("at least two eigenvalues are required")]
    DegenerateSpectrum,

    #[error("point {re}{im:+}i lies outside the grid window")]
    OutOfBounds { re: f64, im: f64 },

    #[error("no grid cell lies in the level set at epsilon {epsilon:e}; widen the window")]
    EmptyLevelSet { epsilon: f64 },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid structure pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
