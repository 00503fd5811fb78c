use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain an operation supports (lattice too small,
    /// wrap-around of the periodized potential, size guards, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative procedure did not reach its tolerance.
    #[error("{what} did not converge: residual {residual:e} (target {target:e})")]
    Convergence {
        what: String,
        residual: f64,
        target: f64,
    },

    /// `A_k < |B_k|` for some mode, so the Bogoliubov dispersion is not real.
    #[error("Bogoliubov stability violated at mode {mode:?}: A = {a}, B = {b}")]
    Stability { mode: [i32; 3], a: f64, b: f64 },

    /// Malformed user input (config files, tabulated potentials, cache files).
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
