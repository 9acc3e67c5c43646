use std::io;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value at flat index {index}")]
    NonFiniteValue { index: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("label entry ({row}, {col}) is {value}, expected 0 or 1")]
    InvalidLabel { row: usize, col: usize, value: f64 },
    #[error("k = {k} outside the valid range [1, {max}]")]
    InvalidK { k: usize, max: usize },
    #[error("missing input: {0}")]
    MissingInput(&'static str),
    #[error("detector `{0}` must be fitted before scoring")]
    UnfittedDetector(&'static str),
    #[error("input perturbation needs differentiable inputs, got {0}")]
    PerturbationUnsupported(&'static str),
    #[error("label {0} has no positive instances")]
    EmptyClass(usize),
    #[error("covariance is not positive definite after regularization")]
    SingularCovariance,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("score vector is empty")]
    EmptyScores,
    #[error("geometric mean needs nonnegative inputs, found {value}")]
    NonNegativityViolated { value: f64 },
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("validation set is empty")]
    EmptyValidation,
    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },
    #[error("no label has both positive and negative instances")]
    NoEvaluableLabels,
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported matrix file version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported dtype byte {0}")]
    UnsupportedDtype(u8),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("malformed csv: {0}")]
    MalformedCsv(String),
    #[error("invalid score spec: {0}")]
    InvalidSpec(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidLabel { .. } => "InvalidLabel",
            Error::InvalidK { .. } => "InvalidK",
            Error::MissingInput(_) => "MissingInput",
            Error::UnfittedDetector(_) => "UnfittedDetector",
            Error::PerturbationUnsupported(_) => "PerturbationUnsupported",
            Error::EmptyClass(_) => "EmptyClass",
            Error::SingularCovariance => "SingularCovariance",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::EmptyScores => "EmptyScores",
            Error::NonNegativityViolated { .. } => "NonNegativityViolated",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::EmptyValidation => "EmptyValidation",
            Error::Divergence { .. } => "Divergence",
            Error::NoEvaluableLabels => "NoEvaluableLabels",
            Error::BadMagic(_) => "BadMagic",
            Error::UnsupportedVersion(_) => "UnsupportedVersion",
            Error::UnsupportedDtype(_) => "UnsupportedDtype",
            Error::TruncatedPayload { .. } => "TruncatedPayload",
            Error::TrailingBytes(_) => "TrailingBytes",
            Error::MalformedCsv(_) => "MalformedCsv",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::MissingArtifact(_) => "MissingArtifact",
            Error::Json(_) => "Json",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
