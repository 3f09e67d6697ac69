use thiserror::Error;

/// Errors raised by the numerical routines and the file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("density is singular at x = {0}")]
    Singularity(f64),

    #[error("quadrature did not converge: estimated error {achieved:e} exceeds requested {requested:e} after {intervals} intervals")]
    NonConvergence {
        achieved: f64,
        requested: f64,
        intervals: usize,
    },

    #[error("integral diverges: |t| = {t} is outside the MGF strip of radius {radius}")]
    Divergence { t: f64, radius: f64 },

    #[error("grid density is not normalized: mass = {mass}")]
    NotNormalized { mass: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fewer than 3 usable nodes ({0}) for a shape check")]
    TooFewNodes(usize),

    #[error("function is not strictly positive at probe x = {x} (value {value})")]
    NotPositive { x: f64, value: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("empty sample batch")]
    EmptyBatch,

    #[error("reference CDF is not monotone or leaves [0, 1] near x = {0}")]
    NonMonotoneCdf(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
