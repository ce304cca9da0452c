use thiserror::Error;

pub type Result<T> = std::result::Result<T, GpError>;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("invalid domain shape: {0}")]
    InvalidShape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("Krylov solver did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("operator is not positive definite (curvature {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("degenerate retraction: |u + xi| = {0:.3e}")]
    DegenerateRetraction(f64),
    #[error("degenerate projection: Re<u, v_X> = {0:.3e}")]
    DegenerateProjection(f64),
    #[error("degenerate transport: |u + eta| = {0:.3e}")]
    DegenerateTransport(f64),
    #[error("line search found no decrease after {evals} energy evaluations")]
    NoDecrease { evals: usize },
    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
