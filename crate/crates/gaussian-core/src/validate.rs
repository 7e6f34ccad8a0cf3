use serde::Serialize;

use crate::linalg::symmetry_defect;
use crate::symplectic::symplectic_eigenvalues;
use crate::{GaussianOperator, OperatorKind};

/// Slack allowed below the exact Heisenberg bound of 1/2 on symplectic
/// eigenvalues when judging admissibility.
pub const ADMISSIBILITY_SLACK: f64 = 1e-10;

/// Diagnostic summary of a Gaussian operator's structural health.
///
/// Produced by [`GaussianOperator::validate`]; never mutates the operator.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub kind: OperatorKind,
    /// Largest relative covariance asymmetry `|σ_ij - σ_ji|`.
    pub symmetry_defect: f64,
    /// Smallest symplectic eigenvalue of the covariance (NaN if the
    /// spectrum could not be computed).
    pub min_symplectic_eigenvalue: f64,
    /// Smallest ordinary eigenvalue of the covariance.
    pub min_covariance_eigenvalue: f64,
    /// Whether the covariance is positive definite.
    pub positive_definite: bool,
    /// States: all symplectic eigenvalues at least 1/2 (Heisenberg
    /// admissibility). Effects: positive definite covariance.
    pub admissible: bool,
}

impl GaussianOperator {
    /// Report symmetry defect, symplectic spectrum and positivity of the
    /// covariance, and whether the operator is admissible for its kind.
    pub fn validate(&self) -> ValidationReport {
        let eigs = self.cov().clone().symmetric_eigenvalues();
        let min_eig = eigs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let positive_definite = min_eig > 0.0;
        let min_nu = symplectic_eigenvalues(self.cov())
            .map(|nu| nu.into_iter().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NAN);
        let admissible = match self.kind() {
            OperatorKind::State => min_nu >= 0.5 - ADMISSIBILITY_SLACK,
            OperatorKind::Effect => positive_definite,
        };
        ValidationReport {
            kind: self.kind(),
            symmetry_defect: symmetry_defect(self.cov()),
            min_symplectic_eigenvalue: min_nu,
            min_covariance_eigenvalue: min_eig,
            positive_definite,
            admissible,
        }
    }
}
