//! Small dense-matrix helpers shared by the phase-space operations.

use nalgebra::{DMatrix, DVector};

use crate::{GaussianError, Result};

/// Reciprocal-condition-number floor below which symmetric positive definite
/// solves are rejected as numerically singular.
pub const SPD_RCOND_FLOOR: f64 = 1e-13;

/// Force exact symmetry by averaging a matrix with its transpose.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// Largest absolute asymmetry `|m_ij - m_ji|` relative to the largest
/// absolute entry (with a floor of 1 so the zero matrix is symmetric).
pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let scale = m.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let mut defect = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    defect / scale
}

/// Solve `m x = rhs` for each column of `rhs`, where `m` is symmetric
/// positive definite.
///
/// The eigenvalue ratio of `m` is checked first: a reciprocal condition
/// number below [`SPD_RCOND_FLOOR`] is reported as a singularity instead of
/// silently amplifying noise.
pub fn spd_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    let eigs = m.clone().symmetric_eigenvalues();
    let max = eigs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let min = eigs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(min > 0.0) || min / max < SPD_RCOND_FLOOR {
        return Err(GaussianError::NumericalSingularity(format!(
            "{context}: matrix has eigenvalue range [{min:.3e}, {max:.3e}]"
        )));
    }
    let chol = nalgebra::Cholesky::new(symmetrize(m)).ok_or_else(|| {
        GaussianError::NumericalSingularity(format!("{context}: Cholesky factorization failed"))
    })?;
    let mut out = rhs.clone();
    chol.solve_mut(&mut out);
    Ok(out)
}

/// Same as [`spd_solve`] for a single right-hand-side vector.
pub fn spd_solve_vec(m: &DMatrix<f64>, rhs: &DVector<f64>, context: &str) -> Result<DVector<f64>> {
    let cols = DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice());
    let sol = spd_solve(m, &cols, context)?;
    Ok(DVector::from_column_slice(sol.as_slice()))
}

/// Inverse of a symmetric positive definite matrix through [`spd_solve`].
pub fn spd_inverse(m: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    let id = DMatrix::identity(m.nrows(), m.ncols());
    Ok(symmetrize(&spd_solve(m, &id, context)?))
}

/// Row-major nested representation of a matrix, the interchange form used in
/// the JSON formats.
pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Rebuild a matrix from row-major nested data; all rows must have the same
/// length.
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(GaussianError::InvalidArgument(
            "ragged covariance rows".into(),
        ));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}
