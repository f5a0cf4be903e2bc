use thiserror::Error;

/// Errors raised across the laboratory.
///
/// Validation failures (bad input, violated preconditions) are kept apart from
/// numerical failures (non-convergence, blow-up) so front ends can map them to
/// different exit statuses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no support")]
    NoSupport,

    #[error("pole on or inside unit circle not excluded: pole radius {0}")]
    PoleNotExcluded(f64),

    #[error("near-singular symbol: pole radius {0}")]
    NearSingularSymbol(f64),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("blow-up or instability at t = {time}")]
    BlowUp { time: f64 },

    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),

    #[error("degenerate choice, no contradiction: {0}")]
    Degenerate(String),

    #[error("u0 lies in L2, construction vacuous")]
    VacuousConstruction,

    #[error("Q(z) = 1 - a z^p - b z^q has an extra gap {gap:e} at n = {index}; not a two-gap potential")]
    ExtraGap { index: usize, gap: f64 },

    #[error("malformed data: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether the failure is numerical (as opposed to a validation error).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::BlowUp { .. }
                | Error::EigenSolver(_)
                | Error::NearSingularSymbol(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Format(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
