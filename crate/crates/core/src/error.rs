//! Crate-wide error type.

use thiserror::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// An answer string could not be parsed under a numeric answer kind.
    #[error("unparseable answer for kind {kind}: {raw:?}")]
    UnparseableAnswer { kind: &'static str, raw: String },

    /// An aggregate was requested over an empty collection.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Rate limited by the model backend after retries were exhausted.
    #[error("rate limited after {attempts} attempts: {message}")]
    RateLimited { attempts: u32, message: String },

    /// The model backend timed out.
    #[error("provider timeout: {0}")]
    Timeout(String),

    /// Credentials missing or rejected.
    #[error("authentication failure: {0}")]
    AuthFailure(String),

    /// Replay-mode request whose digest has no cache entry.
    #[error("replay miss: no cached response for digest {digest}")]
    ReplayMiss { digest: String },

    /// A model response was missing a required fenced block.
    #[error("missing block in model response: {0}")]
    MissingBlock(String),

    /// Switch training data lacks one of the two label classes.
    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    /// The algorithmicity classifier returned no parseable verdict.
    #[error("unclassified instance {id}: {message}")]
    UnclassifiedInstance { id: String, message: String },

    /// A dataset record violated the input schema.
    #[error("schema error at {path}:{line}: {message}")]
    SchemaError {
        path: String,
        line: usize,
        message: String,
    },

    /// Configuration file or override problem.
    #[error("config error: {0}")]
    Config(String),

    /// Sandbox worker could not be driven at all (spawn failure etc.).
    #[error("sandbox harness failure: {0}")]
    Sandbox(String),

    /// Generic provider transport failure.
    #[error("provider error: {0}")]
    Provider(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
