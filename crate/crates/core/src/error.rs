use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
///
/// The variants map onto the CLI exit codes: configuration problems exit
/// with 1, data problems with 2 and numerical failures with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("matrix is not positive definite ({context}); regularize it before solving")]
    NotPositiveDefinite { context: String },

    #[error(
        "graphical lasso did not converge after {iterations} sweeps \
         (last mean change {last_change:.3e}, max KKT violation {kkt_violation:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        kkt_violation: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("scale {scale}: {source}")]
    AtScale {
        scale: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn at_scale(self, scale: usize) -> Self {
        Error::AtScale {
            scale,
            source: Box::new(self),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 2,
            Error::NotPositiveDefinite { .. }
            | Error::NonConvergence { .. }
            | Error::Numerical(_) => 3,
            Error::AtScale { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
