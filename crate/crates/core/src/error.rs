use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
///
/// Variants split into input problems (bad tables, flags, configs) and
/// numerical problems (an estimator that cannot produce a value); the CLI
/// maps them to exit codes 2 and 3 respectively.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("estimator is infeasible for these data: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("too few draws: need at least {needed}, got {got}")]
    TooFewDraws { needed: usize, got: usize },

    #[error("zero variance in draws")]
    ZeroVariance,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the numbers rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_) | Error::Numerical(_) | Error::ZeroVariance
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
