//! Error type shared by the simulation building blocks.

use thiserror::Error;

/// Construction or precondition failure in the simulation core.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid storage parameters: {0}")]
    InvalidStorage(String),

    #[error("invalid price series: {0}")]
    InvalidSeries(String),

    #[error("invalid discretizer: {0}")]
    InvalidDiscretizer(String),

    #[error("invalid agent config: {0}")]
    InvalidAgentConfig(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("price series too short: need at least {need} steps, got {got}")]
    HorizonTooShort { need: usize, got: usize },
}
