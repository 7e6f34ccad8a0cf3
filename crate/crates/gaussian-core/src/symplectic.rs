use nalgebra::DMatrix;

use crate::{GaussianError, Result};

/// The symplectic form Ω on `n` modes: block diagonal with 2x2 blocks
/// `[[0, 1], [-1, 0]]` in the interleaved `(x1, p1, x2, p2, ...)` ordering.
///
/// Ω encodes the canonical commutators; Gaussian unitaries act on phase
/// space as matrices `L` with `L Ω Lᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(GaussianError::InvalidArgument(
                "symplectic form needs at least one mode".into(),
            ));
        }
        let dim = 2 * n_modes;
        let mut matrix = DMatrix::zeros(dim, dim);
        for k in 0..n_modes {
            matrix[(2 * k, 2 * k + 1)] = 1.0;
            matrix[(2 * k + 1, 2 * k)] = -1.0;
        }
        Ok(Self { n_modes, matrix })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Symplectic eigenvalues of a positive definite covariance matrix, sorted
/// ascending (one value per mode).
///
/// These are the moduli of the eigenvalues of Ωσ, which come in pairs ±iν.
/// A covariance matrix describes a physical state exactly when every ν is
/// at least 1/2; pure states have all ν equal to 1/2.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = cov.nrows();
    if dim == 0 || dim % 2 != 0 || cov.ncols() != dim {
        return Err(GaussianError::InvalidArgument(format!(
            "covariance must be square with even dimension, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let omega = SymplecticForm::new(dim / 2)?;
    let eigs = (omega.matrix() * cov).complex_eigenvalues();
    let mut moduli: Vec<f64> = eigs.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    // Eigenvalues of Ωσ come in ±iν pairs; keep one representative of each.
    Ok(moduli.into_iter().step_by(2).collect())
}

/// Check `L Ω Lᵀ = Ω` entrywise against `tol`.
pub fn is_symplectic(l: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let dim = l.nrows();
    if dim % 2 != 0 || l.ncols() != dim {
        return Err(GaussianError::InvalidArgument(
            "symplectic check needs a square even-dimensional matrix".into(),
        ));
    }
    let omega = SymplecticForm::new(dim / 2)?;
    let delta = l * omega.matrix() * l.transpose() - omega.matrix();
    Ok(delta.iter().all(|v| v.abs() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn omega_squares_to_minus_identity() {
        for n in 1..=4 {
            let omega = SymplecticForm::new(n).unwrap();
            let sq = omega.matrix() * omega.matrix();
            assert_relative_eq!(
                sq,
                -DMatrix::<f64>::identity(2 * n, 2 * n),
                epsilon = 1e-15
            );
            assert_relative_eq!(
                omega.matrix().transpose(),
                -omega.matrix(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn vacuum_spectrum_is_half() {
        let cov = DMatrix::<f64>::identity(4, 4) * 0.5;
        let nu = symplectic_eigenvalues(&cov).unwrap();
        assert_eq!(nu.len(), 2);
        for v in nu {
            assert_relative_eq!(v, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn squeezed_state_stays_minimal() {
        // diag(e^{2r}/2, e^{-2r}/2) is pure: single symplectic eigenvalue 1/2.
        let r: f64 = 0.8;
        let cov = DMatrix::from_diagonal(&nalgebra::dvector![
            0.5 * (2.0 * r).exp(),
            0.5 * (-2.0 * r).exp()
        ]);
        let nu = symplectic_eigenvalues(&cov).unwrap();
        assert_relative_eq!(nu[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_odd_dimension() {
        let cov = DMatrix::<f64>::identity(3, 3);
        assert!(symplectic_eigenvalues(&cov).is_err());
    }
}
