use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("truncated file: {0}")]
    Truncated(String),

    #[error("zero image dimension")]
    ZeroDimension,

    #[error("non-finite intensity at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image too small: {0}")]
    TooSmall(String),

    #[error("covariance matrix not positive definite at pivot {pivot}")]
    NotPositiveDefinite { pivot: usize },

    #[error("dimension too large: {0}")]
    DimensionTooLarge(String),

    #[error("zero variance sample")]
    ZeroVariance,

    #[error("degenerate texture layer")]
    DegenerateTexture,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("too many pyramid levels: {0}")]
    TooManyLevels(String),

    #[error("patch does not fit level: {0}")]
    PatchTooLarge(String),

    #[error("invalid co-occurrence offset: {0}")]
    InvalidOffset(String),

    #[error("empty co-occurrence matrix")]
    EmptyGlcm,

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad arguments or parameters.
    Usage,
    /// File system or file format trouble.
    Io,
    /// Numeric failure (non-PD covariance, degenerate samples, ...).
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Io(_) | UnsupportedFormat(_) | Truncated(_) | ZeroDimension | NonFinite(_) => {
                ErrorClass::Io
            }
            InvalidParameter(_) | TooSmall(_) | LengthMismatch { .. } | TooManyLevels(_)
            | PatchTooLarge(_) | InvalidOffset(_) => ErrorClass::Usage,
            NotPositiveDefinite { .. } | DimensionTooLarge(_) | ZeroVariance
            | DegenerateTexture | EmptyGlcm => ErrorClass::Numeric,
            Stage { source, .. } => source.class(),
        }
    }

    /// Wraps an error with the pipeline stage that raised it.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
