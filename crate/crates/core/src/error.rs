use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("malformed SDP: {0}")]
    MalformedProblem(String),

    #[error("SDP solver failed: {0}")]
    Solver(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid assemblage: {0}")]
    InvalidAssemblage(String),

    #[error("assemblage is not steerable (mu* = {0:.3e})")]
    NotSteerable(f64),

    #[error("dual certificate is not a valid steering functional: {0}")]
    InvalidCertificate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
