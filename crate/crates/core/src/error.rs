use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument falls outside the domain an operation accepts.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration field is missing, malformed or out of range.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("failed to parse config: {0}")]
    ConfigSyntax(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
