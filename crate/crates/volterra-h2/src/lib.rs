//! Fast, oblivious and evolutionary evaluation of Volterra integral
//! operators with a hierarchical (H²) low-rank representation.

pub mod basis;
pub mod dense_eval;
pub mod experiments;
pub mod evaluator;
pub mod h2_eval;
pub mod hierarchy;
pub mod kernel;
pub mod solvers;

/// Errors raised by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("level {level} does not exist for row {m}")]
    LevelOutOfRange { m: usize, level: usize },
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("newton iteration did not converge at step {step} (residual {residual:e})")]
    NewtonFailed { step: usize, residual: f64 },
    #[error("contour quadrature inaccurate: {0}")]
    Contour(String),
    #[error("singular linear system")]
    Singular,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
