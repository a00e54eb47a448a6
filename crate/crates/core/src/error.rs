use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (sizes, ranges, divisibility).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error at line {line}: {message}")]
    Config { line: usize, message: String },

    /// Model-level configuration problem not tied to a source line.
    #[error("configuration error: {0}")]
    Model(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: msg.into(),
        }
    }
}
