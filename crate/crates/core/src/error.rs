use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the engine can report.
///
/// Variants split into two families: validation problems (bad parameters,
/// malformed files, inconsistent requests) and numerical problems (a solver or
/// certificate that did not converge). [`Error::is_numerical`] tells them apart;
/// the CLI maps the two families to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigenfunctions were not requested for this table")]
    MissingVectors,

    #[error("discretization error: {0}")]
    Discretization(String),

    #[error("tolerance error: {0}")]
    Tolerance(String),

    #[error("degeneracy error: {0}")]
    Degeneracy(String),

    #[error("iteration error: {0}")]
    Iteration(String),

    #[error("truncation certificate failed: {0}")]
    Truncation(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("incomplete eigen table: {0}")]
    IncompleteTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier, used in JSON error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ParameterDomain(_) => "parameter_domain",
            Error::Schema { .. } => "schema",
            Error::Regime(_) => "regime",
            Error::Range(_) => "range",
            Error::Consistency(_) => "consistency",
            Error::Unsupported(_) => "unsupported",
            Error::MissingVectors => "missing_vectors",
            Error::Discretization(_) => "discretization",
            Error::Tolerance(_) => "tolerance",
            Error::Degeneracy(_) => "degeneracy",
            Error::Iteration(_) => "iteration",
            Error::Truncation(_) => "truncation",
            Error::Quadrature(_) => "quadrature",
            Error::Resolution(_) => "resolution",
            Error::IncompleteTable(_) => "incomplete_table",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// True for failures of a numerical certificate rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Discretization(_)
                | Error::Tolerance(_)
                | Error::Degeneracy(_)
                | Error::Iteration(_)
                | Error::Truncation(_)
                | Error::Quadrature(_)
                | Error::Resolution(_)
                | Error::IncompleteTable(_)
        )
    }

    pub(crate) fn schema(line: usize, message: impl Into<String>) -> Self {
        Error::Schema {
            line,
            message: message.into(),
        }
    }
}
