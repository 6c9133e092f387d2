use thiserror::Error;

/// Errors produced by core types and the binary format layer.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed bytes in one of the binary formats. `offset` is the byte
    /// position at which the problem was detected.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// A value or combination of values violates a type invariant.
    #[error("validation error: {0}")]
    Validation(String),
}

impl CoreError {
    pub fn format(offset: u64, message: impl Into<String>) -> Self {
        CoreError::Format {
            offset,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        CoreError::Validation(message.into())
    }
}
