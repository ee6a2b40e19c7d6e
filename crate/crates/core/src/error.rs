use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (|M + M^T| = {asymmetry:e})")]
    NotSkew { asymmetry: f64 },

    #[error("degenerate matrix: {0}")]
    Degenerate(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite value in {context}{}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    NonFinite {
        context: &'static str,
        step: Option<usize>,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn non_finite(context: &'static str) -> Self {
        Error::NonFinite { context, step: None }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
