use gaussian_core::GaussianError;
use joint_measurement::JointMeasurementError;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum FockOracleError {
    #[error(transparent)]
    Gaussian(#[from] GaussianError),

    #[error(transparent)]
    JointMeasurement(#[from] JointMeasurementError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
