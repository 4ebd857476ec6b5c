use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("goal interval {interval} of {total} contains no samples (t_min too small for the demo sampling rate)")]
    EmptyInterval { interval: usize, total: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("parse error in {file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("joint {joint} at {value} deg outside bounds [{lo}, {hi}]")]
    JointOutOfBounds {
        joint: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("waypoint {index} at ({x:.3}, {y:.3}, {z:.3}) is unreachable: {reason}")]
    UnreachableWaypoint {
        index: usize,
        x: f64,
        y: f64,
        z: f64,
        reason: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),

    #[error("unsupported schema version: found {found:?}, expected {expected}")]
    SchemaVersion { found: String, expected: &'static str },

    #[error("fitness evaluation failed ({context}): {source}")]
    Fitness {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("YAML error: {0}")]
    Yaml(#[from] serde_yaml::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
