use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("requested {requested} eigenvalues from a matrix of dimension {dim}")]
    Size { requested: usize, dim: usize },

    #[error("inverse iteration did not converge after {0} iterations")]
    Convergence(usize),

    #[error("grid too coarse, refine: {0}")]
    RefineGrid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change found: {0}")]
    Bracket(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid level window: {0}")]
    Window(String),

    #[error("integration window too small: {0}")]
    WidenWindow(String),

    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },

    #[error("at xi = {xi}, branch {branch}: {source}")]
    Sample {
        xi: f64,
        branch: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the sweep coordinate that produced this error.
    pub fn at(self, xi: f64, branch: impl ToString) -> Self {
        Error::Sample {
            xi,
            branch: branch.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
