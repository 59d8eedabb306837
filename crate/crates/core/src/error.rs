use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid variance interval: {0}")]
    InvalidVariance(String),

    #[error("invalid covariance set: {0}")]
    InvalidCovariance(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A function returned NaN or infinity at an evaluation point.
    #[error("non-finite value {value} at x = {at}")]
    NonFinite { at: f64, value: f64 },

    #[error("non-finite input data at index {index}")]
    NonFiniteData { index: usize },

    /// A solver step failed at a particular grid node.
    #[error("step {step} failed at node {node}: {source}")]
    NodeFailure {
        step: usize,
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("stability condition violated: dt = {dt} exceeds dx^2 / sigma_hi^2 = {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("finite-difference sweep produced NaN at t = {t}")]
    Diverged { t: f64 },

    #[error("surface fit residual {rms} exceeds bound {bound}")]
    FitResidual { rms: f64, bound: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("experiment spec field `{field}`: {message}")]
    Spec { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn spec(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            field: field.into(),
            message: message.into(),
        }
    }
}
