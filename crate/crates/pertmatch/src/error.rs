//! Error type shared across the crate.

/// Errors produced by construction, validation, algorithm runs and oracles.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A function or value fell outside its mathematical domain
    /// (e.g. a perturbation table that is not non-increasing).
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument combination is invalid (bad sizes, out-of-range knobs,
    /// unmet preconditions that the caller controls).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The operation does not apply to the instance's allocation mode.
    #[error("mode mismatch: {0}")]
    Mode(String),

    /// A file or byte stream failed to parse, or declared an unsupported
    /// format version.
    #[error("format error: {0}")]
    Format(String),

    /// The input is degenerate in a way that makes the requested quantity
    /// meaningless (e.g. an identically-zero perturbation function).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An exact oracle was asked to handle an instance larger than its
    /// guarded size limit.
    #[error("size guard exceeded: {0}")]
    Guard(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Underlying JSON failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
