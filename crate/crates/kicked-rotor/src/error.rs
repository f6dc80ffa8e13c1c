use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Error, Debug)]
pub enum Error {
    /// Parameter validation failed (negative kick strength, non-positive tau, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A propagation schedule violated its ordering/bounds contract.
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// Matrix dimensions incompatible with the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// The dense eigensolver did not converge or was called incorrectly.
    /// `detail` carries the construction metadata of the offending matrix.
    #[error("eigensolver failed (info={info}) on {detail}")]
    Eigensolver { info: i32, detail: String },

    /// Not enough usable data points for a fit.
    #[error("too few points: needed {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// Malformed text input (key=value blocks, CSV, JSON configs).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
