use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    /// Rank-deficient input to a polar factorization or least-squares solve.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix is not on the Stiefel manifold (‖AᴴA − I‖_F = {0:.3e})")]
    NotOrthonormal(f64),

    #[error("solver failed after restart: {0}")]
    SolverFailed(String),
}

pub(crate) fn check_shape(what: &str, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!("{what}: expected {}x{}, got {}x{}", want.0, want.1, got.0, got.1)));
    }
    Ok(())
}
