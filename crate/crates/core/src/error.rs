use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid construction error: {0}")]
    Grid(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("ring kernel is singular at r = s = 0")]
    SingularInput,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("problem specification violated: {0}")]
    Spec(String),
    #[error("admissibility error: {0}")]
    Admissibility(String),
    #[error("kernel cache error: {0}")]
    Cache(String),
    #[error("state is not converged: {0}")]
    NotConverged(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
