use alloc::string::String;

/// Errors produced by the toolkit.
///
/// The variants group naturally into parameter problems, bad input data,
/// and numerical/experimental failures; the CLI maps them to exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// An operation needs a quantity (a moment, a density bound) that the
    /// configured model cannot provide.
    #[error("unavailable: {0}")]
    Capability(String),
    #[error("no convergence after {iterations} iterations (last step {last_step:e})")]
    Convergence { iterations: usize, last_step: f64 },
    /// A theorem-backed bound was violated; this always indicates a bug.
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn data(msg: impl Into<String>) -> Error {
    Error::Data(msg.into())
}
