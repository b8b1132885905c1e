use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Observer and target coincide, so bearing and range rate are undefined.
    #[error("zero range{} at t = {time}", target.map(|i| format!(" for target {i}")).unwrap_or_default())]
    ZeroRange { target: Option<usize>, time: f64 },

    /// A Doppler-ambiguity spec produced a non-positive range on the window.
    #[error("ambiguity spec is infeasible: range {range} m at t = {time}")]
    NonPositiveRange { time: f64, range: f64 },

    #[error("scale profile must be positive, got {value} at t = {time}")]
    NonPositiveAlpha { time: f64, value: f64 },

    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    /// Composite Simpson needs an even number of intervals.
    #[error("composite Simpson rule needs an odd node count, got {nodes}")]
    OddIntervals { nodes: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error at `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by bad input files rather than by the analysis.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Validation { .. } | Error::Io(_))
    }
}
