use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Node doubling hit `max_nodes` before two successive estimates agreed.
    /// The last estimate is kept so callers can still inspect it.
    #[error("quadrature did not converge with {nodes} nodes (last estimate {value:e}, difference {error:e})")]
    QuadratureNonConvergence { value: f64, error: f64, nodes: usize },

    /// The Landau double series hit its caps before the tail bound was met.
    #[error("Landau series did not converge: {0}")]
    SeriesNonConvergence(String),
}

impl Error {
    /// True for the two non-convergence variants.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. } | Error::SeriesNonConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
