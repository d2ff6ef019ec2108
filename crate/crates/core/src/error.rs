use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An orbit or evaluation reached (a guard neighbourhood of) a pole.
#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
#[error("point {x} lies within the pole guard of {pole}")]
pub struct PoleHit {
    pub x: f64,
    pub pole: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    PoleHit(#[from] PoleHit),

    #[error("orbit truncated after {steps} steps: {hit}")]
    OrbitTruncated { steps: usize, hit: PoleHit },

    #[error("root finder did not converge: {0}")]
    NonConvergence(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("periodic search exhausted after {steps} steps (bound {bound})")]
    SearchExhausted { steps: usize, bound: f64 },

    #[error("map constants unavailable: {0}")]
    ConstantsUnavailable(String),

    #[error("grid check failed at x = {x} ({clause})")]
    GridFailure { x: f64, clause: String },

    #[error("cylinder count exceeded {limit}")]
    CylinderOverflow { limit: usize },

    #[error("identity violated at z = {z}: {detail}")]
    IdentityViolation { z: String, detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("experiment `{experiment}` failed: {source}")]
    Experiment {
        experiment: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
