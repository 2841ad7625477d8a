use thiserror::Error;

/// Errors surfaced by the model, channel, numeric and solver layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Sensing alone costs more energy than the user's budget.
    #[error("user {user}: sensing energy {e_sense} J exceeds budget {e_max} J")]
    NegativeBudget { user: usize, e_sense: f64, e_max: f64 },

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    /// Linear system is singular or not positive definite.
    #[error("matrix is singular or not positive definite")]
    SingularMatrix,

    #[error("zero distance between nodes")]
    ZeroDistance,

    /// The SDP splitting iteration did not reach its tolerances.
    #[error("SDP solver did not converge within {max_iters} iterations (residual {residual})")]
    NonConvergence { max_iters: usize, residual: f64 },

    /// Zero-forcing requires a full-rank direct channel matrix.
    #[error("direct channel matrix is rank deficient")]
    RankDeficient,

    #[error("invalid configuration: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
