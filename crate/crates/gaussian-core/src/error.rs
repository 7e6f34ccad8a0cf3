use thiserror::Error;

/// Errors produced by Gaussian phase-space operations.
#[derive(Debug, Clone, Error)]
pub enum GaussianError {
    /// A precondition on the inputs was violated (bad dimensions, out-of-range
    /// mode index, non-finite parameter, asymmetric covariance, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix that must be invertible for the requested operation is
    /// singular or too ill-conditioned to trust.
    #[error("numerical singularity: {0}")]
    NumericalSingularity(String),
}
