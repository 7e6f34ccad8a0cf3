use nalgebra::DMatrix;

use crate::symplectic::is_symplectic;
use crate::{GaussianError, GaussianOperator, Result, VectorLayout};

/// Tolerance for the symplectic condition `L Ω Lᵀ = Ω` on maps that claim
/// to represent unitary Gaussian evolution.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// A linear map on stacked phase-space vectors, carrying the coordinate
/// layout its matrix is written in.
///
/// Heisenberg-picture Gaussian evolution transforms means as `r -> L r` and
/// covariances as `σ -> L σ Lᵀ`; for unitary evolution `L` is symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPhaseSpaceMap {
    matrix: DMatrix<f64>,
    layout: VectorLayout,
}

impl LinearPhaseSpaceMap {
    /// Map written directly in interleaved coordinates.
    pub fn interleaved(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_layout(matrix, VectorLayout::Interleaved)
    }

    /// Map whose matrix is written in the given layout.
    pub fn with_layout(matrix: DMatrix<f64>, layout: VectorLayout) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || dim % 2 != 0 || matrix.ncols() != dim {
            return Err(GaussianError::InvalidArgument(format!(
                "phase-space map must be square with even dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(GaussianError::InvalidArgument(
                "map entries must be finite".into(),
            ));
        }
        // Make sure the layout is consistent with the dimension.
        layout.index_map(dim / 2)?;
        Ok(Self { matrix, layout })
    }

    pub fn identity(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(GaussianError::InvalidArgument(
                "identity map needs at least one mode".into(),
            ));
        }
        Self::interleaved(DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    /// Phase-space rotation by `theta` on a single mode (identity on the
    /// rest): `x -> x cos θ + p sin θ`, `p -> -x sin θ + p cos θ`.
    pub fn mode_rotation(n_modes: usize, mode: usize, theta: f64) -> Result<Self> {
        if mode >= n_modes {
            return Err(GaussianError::InvalidArgument(format!(
                "mode {mode} out of range for {n_modes} modes"
            )));
        }
        if !theta.is_finite() {
            return Err(GaussianError::InvalidArgument(
                "rotation angle must be finite".into(),
            ));
        }
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let (c, s) = (theta.cos(), theta.sin());
        m[(2 * mode, 2 * mode)] = c;
        m[(2 * mode, 2 * mode + 1)] = s;
        m[(2 * mode + 1, 2 * mode)] = -s;
        m[(2 * mode + 1, 2 * mode + 1)] = c;
        Self::interleaved(m)
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn layout(&self) -> VectorLayout {
        self.layout
    }

    /// The matrix as written in `self.layout()` coordinates.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The matrix expressed in interleaved coordinates (`Pᵀ L P` for the
    /// layout permutation `P`).
    pub fn interleaved_matrix(&self) -> DMatrix<f64> {
        match self.layout {
            VectorLayout::Interleaved => self.matrix.clone(),
            _ => {
                let p = self
                    .layout
                    .permutation(self.n_modes())
                    .expect("layout validated at construction");
                p.transpose() * &self.matrix * p
            }
        }
    }

    /// Whether the map satisfies `L Ω Lᵀ = Ω` to `tol`.
    pub fn is_symplectic(&self, tol: f64) -> bool {
        // Ω has the same block form in every layout that permutes whole
        // modes, so checking in interleaved coordinates is general.
        is_symplectic(&self.interleaved_matrix(), tol).unwrap_or(false)
    }

    /// Apply the map: `mean -> L mean`, `cov -> L cov Lᵀ`, kind preserved.
    pub fn apply(&self, op: &GaussianOperator) -> Result<GaussianOperator> {
        if op.n_modes() != self.n_modes() {
            return Err(GaussianError::InvalidArgument(format!(
                "map on {} modes applied to operator on {} modes",
                self.n_modes(),
                op.n_modes()
            )));
        }
        let l = self.interleaved_matrix();
        let mean = &l * op.mean();
        let cov = crate::linalg::symmetrize(&(&l * op.cov() * l.transpose()));
        Ok(GaussianOperator::from_parts(mean, cov, op.kind()))
    }
}
