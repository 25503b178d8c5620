use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical divergence at t = {time}: non-finite state")]
    Divergence { time: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("ill-conditioned system (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("index {index} out of range for {len} agents")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("incomplete topology: {0}")]
    IncompleteTopology(String),

    #[error("mu = {mu} outside (0, {upper})")]
    InvalidMu { mu: f64, upper: f64 },

    #[error("beta = {beta} outside the open interval (0, {upper}) = (0, 2*lambda_min(Q))")]
    BetaOutOfRange { beta: f64, upper: f64 },

    #[error("path {path} failed: {source}")]
    PathFailed {
        path: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-positive value {value} at t = {time} in fit window")]
    NonPositiveSignal { time: f64, value: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
