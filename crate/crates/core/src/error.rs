use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular matrix: pivot {pivot:e} below floor {floor:e}")]
    SingularMatrix { pivot: f64, floor: f64 },

    #[error("energy {energy} is outside the band of orbital {orbital}")]
    OutOfBand { energy: f64, orbital: usize },

    #[error("ensemble {0} has unbounded support")]
    UnsupportedEnsemble(&'static str),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian at residual {residual:e}")]
    SingularJacobian { residual: f64 },

    #[error("continuation lost the Herglotz branch at eta = {eta:e}")]
    ContinuationBreakdown { eta: f64 },

    #[error("symbol degree {degree} exceeds truncation degree {max}")]
    TruncationOverflow { degree: usize, max: usize },

    #[error("eigenvalue modulus violated at J = {index}: deviation {deviation:e}")]
    ModulusViolation { index: String, deviation: f64 },

    #[error("operator dimension {dim} exceeds the limit {limit}")]
    SizeOverflow { dim: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Errors caused by the requested point lying outside the admissible
    /// spectral domain, as opposed to malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::OutOfBand { .. }
                | Error::UnsupportedEnsemble(_)
                | Error::SingularMatrix { .. }
                | Error::SingularJacobian { .. }
                | Error::ContinuationBreakdown { .. }
                | Error::NoConvergence { .. }
        )
    }
}
