//! Crate-wide error type.

use std::fmt;

/// Errors surfaced by the localisation toolkit.
#[derive(Debug)]
pub enum Error {
    /// A house layout failed validation (unreachable rooms, asymmetric
    /// adjacency, bad counts).
    InvalidLayout(String),
    /// A configuration value is out of range or inconsistent.
    InvalidConfig(String),
    /// An operation received an empty input it cannot handle.
    EmptyInput(&'static str),
    /// Tensor/sequence dimensions do not line up.
    ShapeMismatch { expected: String, got: String },
    /// A label index is outside `[0, c)`.
    LabelOutOfRange { label: usize, classes: usize },
    /// The QP constraint set admits no feasible point.
    Infeasible(String),
    /// Training produced a non-finite loss or gradient.
    Diverged(String),
    /// A model checkpoint is incompatible with the data it is applied to.
    ModelMismatch(String),
    /// Paired analysis inputs are not aligned in time.
    Misaligned(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
    /// JSON (de)serialisation failure.
    Json(serde_json::Error),
    /// CSV (de)serialisation failure.
    Csv(csv::Error),
    /// Malformed record in an input file.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidLayout(msg) => write!(f, "invalid layout: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            Error::LabelOutOfRange { label, classes } => {
                write!(f, "label {label} out of range for {classes} classes")
            }
            Error::Infeasible(msg) => write!(f, "infeasible constraint set: {msg}"),
            Error::Diverged(msg) => write!(f, "training diverged: {msg}"),
            Error::ModelMismatch(msg) => write!(f, "model/data mismatch: {msg}"),
            Error::Misaligned(msg) => write!(f, "misaligned inputs: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
            Error::Csv(e) => write!(f, "csv error: {e}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            Error::Csv(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e)
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
