use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested integral does not converge in this dimension.
    #[error("divergent integral: {quantity} is infinite for d = {d}")]
    Divergent { quantity: &'static str, d: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("budget exceeded: estimated {estimate:.3e} events, budget {budget:.3e}")]
    Budget { estimate: f64, budget: f64 },

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
