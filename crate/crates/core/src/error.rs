use thiserror::Error;

/// Errors raised by the numerics, estimation, detection and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    /// The gain vector is empty or has zero magnitude, so the matched
    /// direction is undefined.
    #[error("degenerate gain: {0}")]
    DegenerateGain(String),

    /// The two codewords map to the same point under the channel gains.
    #[error("ambiguous codeword pair: the codewords coincide under the gains")]
    AmbiguousPair,

    #[error("near-singular gain at component {index}: |A| = {magnitude:e}")]
    NearSingularGain { index: usize, magnitude: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
