use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Support of the first argument not contained in the support of the second.
    #[error("support violation: smallest reference eigenvalue on the state support is {min_eigenvalue:e}")]
    Support { min_eigenvalue: f64 },

    /// Regions or partitions that do not fit the lattice.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Dense representation would exceed the supported size.
    #[error("resource error: {what} needs dimension {requested}, limit is {limit}")]
    Resource {
        what: String,
        requested: usize,
        limit: usize,
    },

    /// Least-squares design matrix is rank deficient.
    #[error("fit error: {0}")]
    Fit(String),

    /// Spectral hypotheses (gap, uniqueness) are violated.
    #[error("analysis error: {0}")]
    Analysis(String),

    /// Two evaluation routes of an exact identity disagree.
    #[error("identity violated: {0}")]
    Identity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }
}
