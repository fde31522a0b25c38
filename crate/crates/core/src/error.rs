use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Parameters miss an exact-condition point; carries the nearest point that satisfies it.
    #[error("{reason}; nearest on-condition point is a/λ = {a_over_lambda}, b/λ = {b_over_lambda}")]
    OffCondition {
        reason: String,
        a_over_lambda: f64,
        b_over_lambda: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("integration produced non-finite amplitudes at t = {time}")]
    IntegrationDiverged { time: f64 },

    #[error("integration not converged: half-step defect {defect:e} exceeds {tolerance:e}")]
    NotConverged { defect: f64, tolerance: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("realization {realization}: site ordering still violated after {attempts} resamples")]
    ResampleLimit { realization: usize, attempts: usize },
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::EigenNoConvergence { .. }
                | Error::IntegrationDiverged { .. }
                | Error::NotConverged { .. }
                | Error::ResampleLimit { .. }
        )
    }
}
