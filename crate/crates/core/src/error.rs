use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Closures evaluated to a state the hypotheses rule out.
    #[error("model inconsistency at s = {s}: {reason}")]
    Model { s: f64, reason: String },

    /// Adaptive quadrature hit its depth cap without meeting the tolerance.
    #[error("integration failed on [0, {s}]: achieved error estimate {estimate:e}")]
    Integration { s: f64, estimate: f64 },

    /// An explicit update left the admissible saturation band.
    #[error(
        "stability violation at step {step}, t = {time}: cell {cell} has u = {value:.17e}; \
         reduce sigma or the nominal time step"
    )]
    Stability {
        step: usize,
        time: f64,
        cell: usize,
        value: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit status for the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::InsufficientData(_) => 2,
            Error::Model { .. } | Error::Integration { .. } | Error::Stability { .. } => 3,
            Error::Io { .. } => 4,
        }
    }
}
