use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix spans only the zero vector")]
    EmptySpan,

    #[error("simplex exceeded its iteration limit ({iterations} pivots)")]
    SolverFailure { iterations: usize },

    #[error("pair ({first}, {second}): {source}")]
    Pair {
        first: usize,
        second: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("cone lacks the overlap property: no strictly positive measurement vector exists")]
    NoAnchor,

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("circulant matrix is singular at frequencies {frequencies:?}")]
    Singular { frequencies: Vec<usize> },

    #[error("anchor positivity margin is not positive ({0})")]
    ZeroMargin(f64),

    #[error("detector bank has no detector for cones ({0}, {1})")]
    MissingDetector(usize, usize),

    #[error("n = {n}, trial {trial}: {source}")]
    Trial {
        n: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
