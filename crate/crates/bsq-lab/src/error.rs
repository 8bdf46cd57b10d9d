use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration (bad grid size, unknown key, out-of-range parameter).
    #[error("configuration error: {0}")]
    Config(String),
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid mismatch: fields live on different grids")]
    GridMismatch,
    /// Precondition of an operator violated by its inputs (e.g. nonzero mean).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Fixed-point inversion of the good unknown failed to contract.
    #[error("good-unknown inversion did not contract: factor {factor:.3e} after {iterations} iterations")]
    NonContraction { factor: f64, iterations: usize },
    /// Smallness hypothesis on ζ violated.
    #[error("ansatz violated: {0}")]
    Ansatz(String),
    /// Input that cannot be processed by the requested study.
    #[error("unusable input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
