use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {0}")]
    Singular(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("iteration did not converge after {iterations} steps (last residual {last_residual:.3e})")]
    NoConvergence {
        iterations: usize,
        last_residual: f64,
        history: Vec<f64>,
    },

    #[error("pipeline error: stage `{stage}` needs output of `{missing}`")]
    Pipeline { stage: String, missing: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
