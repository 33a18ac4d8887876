use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside the domain of {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("{what} did not converge within {terms} terms")]
    NoConvergence { what: &'static str, terms: usize },

    #[error("quadrature tolerance not met: estimate {estimate:e}, error bound {error:e}")]
    Tolerance { estimate: f64, error: f64 },

    #[error("root not bracketed on [{lower}, {upper}]")]
    Bracket { lower: f64, upper: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("simulation budget exhausted: standard error {std_error:e} exceeds cap {cap:e}")]
    Budget { std_error: f64, cap: f64 },

    #[error("geometry {index}: {source}")]
    AtGeometry {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(detail: impl Into<String>) -> Self {
        Error::InvalidParameter(detail.into())
    }

    /// True when the error (or the error it wraps) came from a numerical
    /// tolerance or convergence failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::Tolerance { .. } | Error::Bracket { .. } => true,
            Error::AtGeometry { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub fn is_budget(&self) -> bool {
        match self {
            Error::Budget { .. } => true,
            Error::AtGeometry { source, .. } => source.is_budget(),
            _ => false,
        }
    }
}
