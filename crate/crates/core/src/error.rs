use thiserror::Error;

/// Broad failure category; the CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Parse,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("order violated: {0}")]
    RejectOrder(String),

    #[error("`{field}` out of range: {detail}")]
    RejectRange { field: String, detail: String },

    #[error("missing required field `{0}`")]
    RejectMissing(String),

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("compartment {component} fell to {value:e} at t = {t}; reduce dt")]
    NegativeState {
        t: f64,
        component: usize,
        value: f64,
    },

    #[error("transition matrix is numerically singular")]
    SingularSigma,

    #[error("trajectory has no recorded states")]
    EmptyTrajectory,

    #[error("invalid render dimensions {width}x{height}")]
    InvalidDimensions { width: f64, height: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::RejectOrder(_)
            | Error::RejectRange { .. }
            | Error::RejectMissing(_)
            | Error::InvalidDimensions { .. } => ErrorKind::Validation,
            Error::NonFinite { .. }
            | Error::NegativeState { .. }
            | Error::SingularSigma
            | Error::EmptyTrajectory => ErrorKind::Numerical,
            Error::Parse { .. } => ErrorKind::Parse,
        }
    }

    pub fn range(field: &str, detail: impl Into<String>) -> Self {
        Error::RejectRange {
            field: field.to_string(),
            detail: detail.into(),
        }
    }

    /// Prefix field names with a key path such as `params.`.
    pub fn at_path(self, prefix: &str) -> Self {
        match self {
            Error::RejectMissing(f) => Error::RejectMissing(format!("{prefix}{f}")),
            Error::RejectRange { field, detail } => Error::RejectRange {
                field: format!("{prefix}{field}"),
                detail,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
