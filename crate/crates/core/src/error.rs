use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("estimated norm {ell_tilde} is below the underflow threshold {threshold}; the lower bound on the normalization is likely overstated")]
    NormUnderflow { ell_tilde: f64, threshold: f64 },
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Config(_) | Error::Io(_) => 2,
            Error::InvalidInput(_) | Error::Precondition(_) | Error::NormUnderflow { .. } => 3,
            Error::Convergence(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
