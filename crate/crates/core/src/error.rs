use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("unsupported datatype code {code}; supported codes: {supported:?}")]
    UnsupportedDatatype { code: i16, supported: &'static [i16] },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("missing dependency: {0}")]
    MissingDependency(String),

    #[error("view mismatch: expected {expected} view, got {actual}")]
    ViewMismatch { expected: &'static str, actual: &'static str },

    #[error("empty mask: {0}")]
    EmptyMask(String),

    #[error("insufficient landmarks: need at least {needed}, found {found}")]
    InsufficientLandmarks { needed: usize, found: usize },

    #[error("insufficient cohort: need at least {needed} samples, found {found}")]
    InsufficientCohort { needed: usize, found: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("taxonomy mismatch: missing in prediction {missing_in_pred:?}, missing in reference {missing_in_gt:?}")]
    TaxonomyMismatch {
        missing_in_pred: Vec<String>,
        missing_in_gt: Vec<String>,
    },

    #[error("phantom spec error in {shape}: {message}")]
    PhantomSpec { shape: String, message: String },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable code, used for reason columns in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } | Error::Truncated { .. } => "format",
            Error::UnsupportedDatatype { .. } => "unsupported-datatype",
            Error::Argument(_) => "argument",
            Error::Degenerate(_) => "degenerate",
            Error::MissingDependency(_) => "missing-dependency",
            Error::ViewMismatch { .. } => "view-mismatch",
            Error::EmptyMask(_) => "empty-mask",
            Error::InsufficientLandmarks { .. } => "insufficient-landmarks",
            Error::InsufficientCohort { .. } => "insufficient-cohort",
            Error::UndefinedMetric(_) => "undefined-metric",
            Error::NumericDomain(_) => "numeric-domain",
            Error::TaxonomyMismatch { .. } => "taxonomy-mismatch",
            Error::PhantomSpec { .. } => "phantom-spec",
            Error::Serde(_) => "serde",
            Error::Image(_) => "image",
        }
    }
}
