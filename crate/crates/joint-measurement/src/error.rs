use gaussian_core::GaussianError;
use thiserror::Error;

/// Errors from meter-bank construction and outcome recombination.
#[derive(Debug, Clone, Error)]
pub enum JointMeasurementError {
    #[error(transparent)]
    Gaussian(#[from] GaussianError),

    /// The linear constraints pinning the recombined estimate to the target
    /// quadrature cannot be satisfied by the available meter angles.
    #[error("infeasible constraints: {0}")]
    InfeasibleConstraints(String),
}
