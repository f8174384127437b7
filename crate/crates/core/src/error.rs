use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("incompatible corner data: {0}")]
    Incompatible(String),
    #[error("partition construction failed: {0}")]
    Partition(String),
    #[error("singular matrix (zero pivot in column {0})")]
    Singular(usize),
    #[error("not predicted: {0}")]
    NotPredicted(String),
    #[error("no convergence after {iterations} iterations, residual {residual:e}")]
    Divergence { iterations: usize, residual: f64 },
    #[error("singular linearization, estimated kernel dimension {0}")]
    JacobiKernel(usize),
    #[error("not a regular value: {0}")]
    NotRegular(String),
    #[error("no seed converged")]
    NoSeedConverged,
}
