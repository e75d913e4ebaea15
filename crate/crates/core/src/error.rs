use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),
    #[error("insufficient bandwidth: {0}")]
    Bandwidth(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("coverage: {0}")]
    Coverage(String),
    #[error("kernel mismatch: {0}")]
    KernelMismatch(String),
    #[error("ill-conditioned system (condition estimate {cond:e}, relative residual {residual:e})")]
    IllConditioned { cond: f64, residual: f64 },
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
    #[error("perturbation budget exceeded: L = {magnitude} >= budget {budget}")]
    BudgetExceeded { magnitude: f64, budget: f64 },
    #[error("separation: {0}")]
    Separation(String),
    #[error("jitter too large: {0}")]
    JitterTooLarge(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-finite evaluation at x = {x}")]
    Evaluation { x: f64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. }
                | Error::Bandwidth(_)
                | Error::NumericalConsistency(_)
                | Error::Evaluation { .. }
        )
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
