use gaussian_core::QuadratureDirection;
use nalgebra::{Complex, DMatrix};

use crate::{FockDensityMatrix, FockOracleError, Result};

/// Harmonic-oscillator eigenfunctions `ψ_0(x) ... ψ_{count-1}(x)` at `x`,
/// in the ħ = 1 convention with ground-state variance 1/2
/// (`ψ_0(x) = π^{-1/4} e^{-x²/2}`).
///
/// Uses the three-term recurrence on the weighted Hermite functions,
/// `ψ_{n+1} = x √(2/(n+1)) ψ_n - √(n/(n+1)) ψ_{n-1}`, which keeps the
/// Gaussian weight inside every term and stays bounded far beyond the
/// n ≈ 30 overflow point of raw Hermite polynomials.
pub fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut values = Vec::with_capacity(count);
    if count == 0 {
        return values;
    }
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    values.push(psi0);
    if count == 1 {
        return values;
    }
    values.push(std::f64::consts::SQRT_2 * x * psi0);
    for n in 1..(count - 1) {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * values[n]
            - (nf / (nf + 1.0)).sqrt() * values[n - 1];
        values.push(next);
    }
    values
}

/// Symmetric sampling grid of `points` values covering the default window
/// `|x| <= 6 sqrt(cosh s)` for squeezing parameter `s`.
pub fn default_grid(s: f64, points: usize) -> Vec<f64> {
    let half_width = 6.0 * s.cosh().sqrt();
    let n = points.max(2);
    (0..n)
        .map(|k| -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64)
        .collect()
}

/// Quadrature probability density `<x_phi| ρ_reduced |x_phi>` of a reduced
/// single-mode density matrix, evaluated pointwise on `grid`.
///
/// The phase rotation enters as `ρ_jk -> ρ_jk e^{-i phi (j - k)}`, which
/// maps the position marginal of the rotated state onto the `x_phi`
/// marginal of the original.
pub fn reduced_marginal(
    reduced: &DMatrix<Complex<f64>>,
    phi: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(FockOracleError::InvalidArgument(
            "marginal grid must be nonempty".into(),
        ));
    }
    if grid.iter().any(|x| !x.is_finite()) || !phi.is_finite() {
        return Err(FockOracleError::InvalidArgument(
            "grid and angle must be finite".into(),
        ));
    }
    let n = reduced.nrows();
    if reduced.ncols() != n || n == 0 {
        return Err(FockOracleError::InvalidArgument(
            "reduced density matrix must be square and nonempty".into(),
        ));
    }
    // Phase factors e^{-i phi (j - k)} folded into the matrix once.
    let rotated = DMatrix::from_fn(n, n, |j, k| {
        let phase = Complex::from_polar(1.0, -phi * (j as f64 - k as f64));
        reduced[(j, k)] * phase
    });
    Ok(grid
        .iter()
        .map(|&x| {
            let psi = hermite_functions(x, n);
            let mut acc = 0.0;
            for j in 0..n {
                // Hermitian matrix: fold the off-diagonal pairs.
                acc += rotated[(j, j)].re * psi[j] * psi[j];
                for k in (j + 1)..n {
                    acc += 2.0 * rotated[(j, k)].re * psi[j] * psi[k];
                }
            }
            acc
        })
        .collect())
}

/// Quadrature marginal of one mode of a two-mode Fock-space density
/// matrix: reduce over the partner mode, then evaluate
/// [`reduced_marginal`] along `dir`.
pub fn quadrature_marginal_fock(
    rho: &FockDensityMatrix,
    dir: QuadratureDirection,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let reduced = rho.reduced_mode(dir.mode)?;
    reduced_marginal(&reduced, dir.phi, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build_tmss_fock;
    use approx::assert_relative_eq;

    fn trapezoid(values: &[f64], h: f64) -> f64 {
        let inner: f64 = values[1..values.len() - 1].iter().sum();
        h * (inner + 0.5 * (values[0] + values[values.len() - 1]))
    }

    #[test]
    fn hermite_functions_are_orthonormal_numerically() {
        let n = 12;
        let pts = 4001;
        let (lo, hi) = (-12.0, 12.0);
        let h = (hi - lo) / (pts - 1) as f64;
        let mut gram = vec![vec![0.0; n]; n];
        for k in 0..pts {
            let x = lo + k as f64 * h;
            let w = if k == 0 || k == pts - 1 { 0.5 } else { 1.0 };
            let psi = hermite_functions(x, n);
            for a in 0..n {
                for b in 0..n {
                    gram[a][b] += w * h * psi[a] * psi[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert_relative_eq!(gram[a][b], expected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn recurrence_stays_finite_deep_into_the_spectrum() {
        for &x in &[0.0, 1.7, -6.3, 11.9] {
            let psi = hermite_functions(x, 120);
            assert!(psi.iter().all(|v| v.is_finite()));
            assert!(psi.iter().all(|v| v.abs() < 1.0), "bounded envelope");
        }
    }

    #[test]
    fn vacuum_marginal_is_the_half_variance_gaussian() {
        let rho = build_tmss_fock(0.0, 10).unwrap();
        let grid: Vec<f64> = (0..=1000).map(|k| -5.0 + 0.01 * k as f64).collect();
        let density =
            quadrature_marginal_fock(&rho, QuadratureDirection::new(0, 0.0), &grid).unwrap();
        for (&x, &p) in grid.iter().zip(&density) {
            let expected = (-x * x).exp() / std::f64::consts::PI.sqrt();
            assert_relative_eq!(p, expected, epsilon = 1e-8);
        }
    }

    #[test]
    fn tmss_marginal_matches_thermal_gaussian_at_cutoff_forty() {
        let s = 1.0;
        let rho = build_tmss_fock(s, 40).unwrap();
        let grid: Vec<f64> = (0..=500).map(|k| -5.0 + 0.02 * k as f64).collect();
        let variance = s.cosh() / 2.0;
        for mode in [0, 1] {
            let density =
                quadrature_marginal_fock(&rho, QuadratureDirection::new(mode, 0.0), &grid)
                    .unwrap();
            let mut max_err = 0.0_f64;
            for (&x, &p) in grid.iter().zip(&density) {
                let expected = (-0.5 * x * x / variance).exp()
                    / (2.0 * std::f64::consts::PI * variance).sqrt();
                max_err = max_err.max((p - expected).abs());
            }
            assert!(max_err < 1e-6, "mode {mode}: sup error {max_err}");
        }
    }

    #[test]
    fn thermal_reduced_state_is_phase_invariant() {
        let rho = build_tmss_fock(1.2, 30).unwrap();
        let grid: Vec<f64> = (0..=200).map(|k| -6.0 + 0.06 * k as f64).collect();
        let reference =
            quadrature_marginal_fock(&rho, QuadratureDirection::new(0, 0.0), &grid).unwrap();
        for phi in [0.3, 1.1, 2.7] {
            let rotated =
                quadrature_marginal_fock(&rho, QuadratureDirection::new(0, phi), &grid).unwrap();
            for (a, b) in reference.iter().zip(&rotated) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn marginal_integrates_to_kept_trace() {
        let s = 1.4;
        let rho = build_tmss_fock(s, 25).unwrap();
        let grid = default_grid(s, 3001);
        let h = grid[1] - grid[0];
        let density =
            quadrature_marginal_fock(&rho, QuadratureDirection::new(0, 0.0), &grid).unwrap();
        let total = trapezoid(&density, h);
        assert_relative_eq!(total, 1.0 - rho.trace_deficiency(), epsilon = 1e-8);
    }

    #[test]
    fn empty_grid_rejected() {
        let rho = build_tmss_fock(0.5, 5).unwrap();
        assert!(quadrature_marginal_fock(&rho, QuadratureDirection::new(0, 0.0), &[]).is_err());
    }
}
