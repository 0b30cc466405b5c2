use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants map onto the command-line exit codes: validation problems
/// (`InvalidInput`, `Parse`, `Degenerate`, `FitUndefined`) exit with 2,
/// `ResourceLimit` with 3 and `CertificateUnavailable` with 4.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("resource limit exceeded: {what} requires {required}, cap is {cap}")]
    ResourceLimit {
        what: String,
        required: String,
        cap: u64,
    },

    #[error("certificate unavailable: critical point in residue class {class}")]
    CertificateUnavailable { class: String },

    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("fit undefined: {0}")]
    FitUndefined(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn limit(what: impl Into<String>, required: impl ToString, cap: u64) -> Self {
        Error::ResourceLimit {
            what: what.into(),
            required: required.to_string(),
            cap,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
