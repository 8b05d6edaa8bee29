//! Error types shared across the crate.

/// Crate-wide error type.
///
/// The variants split along the boundaries callers care about: bad
/// arguments (`Domain`, `Size`), degenerate geometry (`Geometry`),
/// malformed input files or spec strings (`Parse`, `Spec`), and the
/// refusal to run on a grid too coarse for the requested scales
/// (`Resolution`).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A size or count precondition is violated.
    #[error("size error: {0}")]
    Size(String),

    /// Degenerate geometry (collinear point clouds and the like).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// The grid cannot resolve the requested scale. Carries the minimal
    /// grid size that would; callers should refuse, not warn.
    #[error("resolution error: {msg} (minimum n: {required_n})")]
    Resolution { msg: String, required_n: usize },

    /// Malformed input data (CSV files, numbers that fail to parse).
    #[error("parse error: {0}")]
    Parse(String),

    /// An invalid modulus or run configuration.
    #[error("spec error: {0}")]
    Spec(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }
    pub fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
    pub fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
