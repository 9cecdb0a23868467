use thiserror::Error;

/// Errors raised by the solvers, region assemblers and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidPmf(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver fault: {0}")]
    SolverFault(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
