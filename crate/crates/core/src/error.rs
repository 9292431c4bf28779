use thiserror::Error;

/// Errors raised by the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two independent computation paths disagree.
    #[error("consistency error: {0}")]
    Consistency(String),
    /// A term product exceeded the supported polynomial degree in y.
    #[error("unsupported degree: y^{0} exceeds cap")]
    UnsupportedDegree(u32),
    /// Lower-order data needed by a recursion step is missing.
    #[error("sequencing error: {0}")]
    Sequencing(String),
    /// The requested closed-form entry is not available in closed form.
    #[error("entry ({0},{1}) has no closed form; use the quadrature path")]
    AbsentEntry(usize, usize),
    /// A root bracket could not be established.
    #[error("root finding failed: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
