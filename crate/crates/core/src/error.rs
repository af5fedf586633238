use thiserror::Error;

/// Errors raised by the engine.
///
/// Validation-type failures (bad inputs, unsupported requests) and numerical
/// failures (non-convergence, divergence, runaway trajectories) are kept
/// distinct so that front ends can map them to different exit statuses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("incompatible units: cannot convert {from} to {to}")]
    IncompatibleUnits { from: String, to: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infrared divergence: {0}")]
    Divergence(String),

    #[error("degenerate pair ({n}, {k}): transition frequency is zero")]
    Degenerate { n: String, k: String },

    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("unknown state '{0}'")]
    UnknownState(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("resonance at partner {partner}: frequency {omega} hits a pole without regularization")]
    Resonance { partner: String, omega: f64 },

    #[error("discretization too coarse: {0}")]
    Discretization(String),

    #[error("eigensolver did not converge in channel {channel}, index {index}: {detail}")]
    EigenNotConverged {
        channel: usize,
        index: usize,
        detail: String,
    },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("trajectory {trajectory}: runaway energy {energy:e} exceeds bound {bound:e}")]
    Runaway {
        trajectory: usize,
        energy: f64,
        bound: f64,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by the numerics rather than by the request.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence(_)
                | Error::Resonance { .. }
                | Error::Discretization(_)
                | Error::EigenNotConverged { .. }
                | Error::Quadrature(_)
                | Error::Runaway { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
