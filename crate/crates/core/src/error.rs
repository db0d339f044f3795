use thiserror::Error;

/// Errors raised while validating inputs or emitting artifacts.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mix line {line}: {reason}")]
    Mix { line: usize, reason: String },

    #[error("invalid parameter `{field}`: {reason}")]
    Param { field: &'static str, reason: String },

    #[error("invalid distributor strategy: {0}")]
    Strategy(String),

    #[error("invalid censor action: {0}")]
    Action(String),

    #[error("mix has {count} protocols; censor action enumeration is capped at {cap}")]
    TooManyProtocols { count: usize, cap: usize },

    #[error("invalid curve spec: {0}")]
    Curve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Param {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn mix(line: usize, reason: impl Into<String>) -> Self {
        Error::Mix {
            line,
            reason: reason.into(),
        }
    }

    /// True for failures of the output stream rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
