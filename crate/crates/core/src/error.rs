use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("size mismatch: expected {expected} samples, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("corrupt field: imaginary residue {residue:e} exceeds tolerance (Hermitian symmetry violated)")]
    CorruptField { residue: f64 },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("dyadic index {j} outside resolvable range [{j_min}, {j_max}]")]
    ShellOutOfRange { j: i32, j_min: i32, j_max: i32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("blow-up detected at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },
    #[error("director constraint lost: min |d| = {min_norm} <= 0.5")]
    ConstraintLoss { min_norm: f64 },
    #[error("{path} {message}")]
    Config { path: String, message: String },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
