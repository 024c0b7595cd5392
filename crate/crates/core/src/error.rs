use thiserror::Error;

/// Errors raised across the library.
///
/// Input and dimension problems are distinguished from numerical failures so
/// that the command-line front end can map them onto different exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is numerically singular (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("simplex iteration limit of {limit} exceeded")]
    IterationLimit { limit: usize },

    #[error("solver inconsistency: {0}")]
    SolverInconsistency(String),

    #[error("enumeration of {requested} subsets exceeds the cap of {cap}")]
    SizeCap { requested: u128, cap: u128 },

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::IterationLimit { .. } | Error::SolverInconsistency(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
