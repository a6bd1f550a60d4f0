use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Evaluation outside the chart (the zero section `r = 0`, or `r` below a
    /// stated lower bound).
    #[error("domain error: {0}")]
    Domain(String),

    /// Numerical differentiation or quadrature did not reach the requested
    /// accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// A gluing parameter `t` for which the glued metric is not defined on
    /// the probed grid.
    #[error("admissibility error: {0}")]
    Admissibility(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("load error at line {line}: {message}")]
    Load { line: usize, message: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
