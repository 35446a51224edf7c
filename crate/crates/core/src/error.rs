use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not enough samples: need at least {needed}, partition {partition} has {got}")]
    TooFewSamples {
        partition: usize,
        needed: usize,
        got: usize,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("partition {partition} failed: {source}")]
    Partition {
        partition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("optimization aborted at iteration {iteration}: {reason}")]
    OptimizerAborted {
        iteration: usize,
        reason: String,
        trace: crate::variational::OptimizerTrace,
    },

    #[error("the reference expectation is too close to zero")]
    NearZeroReference,

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension { expected, got })
        }
    }
}
