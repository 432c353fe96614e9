use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The cost function is undefined at the requested point.
    #[error("cost domain violation: {0}")]
    Domain(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric (max relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("initial point not strictly interior: coordinate {index} = {value}")]
    NotInterior { index: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("QUBO has {bits} bits, exceeding the exact solver cap of {cap}; use the `sa` solver")]
    SizeCapExceeded { bits: usize, cap: usize },

    #[error("unknown solver `{name}` (available: {known})")]
    UnknownSolver { name: String, known: String },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("solver failed at iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate generator config: {accepted} of {drawn} draws accepted")]
    DegenerateGenerator { accepted: usize, drawn: usize },

    #[error("problem file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
