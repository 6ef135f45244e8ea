use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular matrix: |det| = {det:e} is below the singular tolerance")]
    SingularMatrix { det: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid number of looks: {0}")]
    InvalidLooks(f64),

    #[error("invalid sample sizes m = {m}, n = {n}")]
    InvalidSampleSize { m: usize, n: usize },

    #[error("invalid significance level: alpha = {alpha}, tests = {num_tests}")]
    InvalidLevel { alpha: f64, num_tests: usize },

    #[error("invalid degrees of freedom: {0}")]
    InvalidDof(usize),

    #[error("pixel ({row}, {col}) lacks full 5x5 support in a {height}x{width} image")]
    OutOfBounds {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },

    #[error("image {height}x{width} is smaller than the required {required}x{required}")]
    ImageTooSmall {
        height: usize,
        width: usize,
        required: usize,
    },

    #[error("window size must be odd and at least 3, got {0}")]
    InvalidWindow(usize),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("degenerate region: intensity variance is zero")]
    DegenerateRegion,

    #[error("no edge detected: {0}")]
    NoEdgeDetected(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid clip quantile {0}, expected a value in (0.5, 1]")]
    InvalidQuantile(f64),

    #[error("bad magic: expected \"PCOV1\\n\"")]
    BadMagic,

    #[error("truncated payload: {0}")]
    TruncatedPayload(String),

    #[error("header mismatch in field `{field}`: {detail}")]
    HeaderMismatch { field: &'static str, detail: String },

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::EmptyInput => "EmptyInput",
            Error::InvalidLooks(_) => "InvalidLooks",
            Error::InvalidSampleSize { .. } => "InvalidSampleSize",
            Error::InvalidLevel { .. } => "InvalidLevel",
            Error::InvalidDof(_) => "InvalidDof",
            Error::OutOfBounds { .. } => "OutOfBounds",
            Error::ImageTooSmall { .. } => "ImageTooSmall",
            Error::InvalidWindow(_) => "InvalidWindow",
            Error::InvalidImage(_) => "InvalidImage",
            Error::DegenerateRegion => "DegenerateRegion",
            Error::NoEdgeDetected(_) => "NoEdgeDetected",
            Error::InvalidScene(_) => "InvalidScene",
            Error::InvalidQuantile(_) => "InvalidQuantile",
            Error::BadMagic => "BadMagic",
            Error::TruncatedPayload(_) => "TruncatedPayload",
            Error::HeaderMismatch { .. } => "HeaderMismatch",
            Error::ThreadPool(_) => "ThreadPool",
            Error::Io(_) => "IoFailure",
            Error::Json(_) => "JsonError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
