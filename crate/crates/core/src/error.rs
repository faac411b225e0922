use thiserror::Error;

/// Malformed caller input: bad shapes, poses, ids or arrangements.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{message}")]
pub struct InputError {
    pub message: String,
}

impl InputError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(#[from] InputError),
    #[error("stable arrangement sampling failed after {attempts} attempts")]
    SamplingFailed { attempts: usize },
    #[error("support-polygon oracle does not apply: {0}")]
    OracleDomain(String),
    #[error("nearest-neighbor query on an empty index")]
    EmptyIndex,
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error("problem generation failed: {0}")]
    Generation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
