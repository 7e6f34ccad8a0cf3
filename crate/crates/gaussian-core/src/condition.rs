use nalgebra::{DMatrix, DVector};

use crate::linalg::{spd_solve, symmetrize};
use crate::{GaussianError, GaussianOperator, OperatorKind, Result};

/// Condition a joint Gaussian state on a Gaussian measurement of some of
/// its modes.
///
/// `part_b` lists the measured modes; `effect_b` is the Gaussian effect the
/// measurement left behind on exactly those modes (in ascending mode
/// order). The returned operator lives on the complement modes `A`, with
///
/// ```text
/// cov_A|B  = σ_A  - σ_AB (σ_B + σ_E)⁻¹ σ_ABᵀ
/// mean_A|B = r̄_A + σ_AB (σ_B + σ_E)⁻¹ (r̄_E - r̄_B)
/// ```
///
/// The solve uses a symmetric positive definite factorization; a reciprocal
/// condition number of `σ_B + σ_E` below the floor in [`crate::linalg`]
/// reports a numerical singularity (usually an over-sharp projective
/// regularizer) instead of returning noise.
pub fn condition_on_effect(
    joint: &GaussianOperator,
    part_b: &[usize],
    effect_b: &GaussianOperator,
) -> Result<GaussianOperator> {
    if joint.kind() != OperatorKind::State {
        return Err(GaussianError::InvalidArgument(
            "conditioning acts on a joint state".into(),
        ));
    }
    if effect_b.kind() != OperatorKind::Effect {
        return Err(GaussianError::InvalidArgument(
            "conditioner must be an effect".into(),
        ));
    }
    let n = joint.n_modes();
    let mut modes_b = part_b.to_vec();
    modes_b.sort_unstable();
    modes_b.dedup();
    if modes_b.len() != part_b.len() {
        return Err(GaussianError::InvalidArgument(
            "measured mode set contains duplicates".into(),
        ));
    }
    if modes_b.iter().any(|&m| m >= n) {
        return Err(GaussianError::InvalidArgument(format!(
            "measured mode out of range for {n} modes"
        )));
    }
    if modes_b.is_empty() || modes_b.len() == n {
        return Err(GaussianError::InvalidArgument(
            "measured modes must be a proper nonempty subset".into(),
        ));
    }
    if effect_b.n_modes() != modes_b.len() {
        return Err(GaussianError::InvalidArgument(format!(
            "effect acts on {} modes but {} modes are measured",
            effect_b.n_modes(),
            modes_b.len()
        )));
    }

    let idx_b: Vec<usize> = modes_b.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let idx_a: Vec<usize> = (0..n)
        .filter(|m| !modes_b.contains(m))
        .flat_map(|m| [2 * m, 2 * m + 1])
        .collect();

    let cov = joint.cov();
    let mean = joint.mean();
    let sigma_a = gather(cov, &idx_a, &idx_a);
    let sigma_b = gather(cov, &idx_b, &idx_b);
    let sigma_ab = gather(cov, &idx_a, &idx_b);
    let mean_a = DVector::from_iterator(idx_a.len(), idx_a.iter().map(|&i| mean[i]));
    let mean_b = DVector::from_iterator(idx_b.len(), idx_b.iter().map(|&i| mean[i]));

    let m = sigma_b + effect_b.cov();
    // X = (σ_B + σ_E)⁻¹ σ_ABᵀ and y = (σ_B + σ_E)⁻¹ (r̄_E - r̄_B).
    let x = spd_solve(&m, &sigma_ab.transpose(), "conditioning matrix σ_B + σ_E")?;
    let y = spd_solve(
        &m,
        &DMatrix::from_column_slice(idx_b.len(), 1, (effect_b.mean() - &mean_b).as_slice()),
        "conditioning matrix σ_B + σ_E",
    )?;

    let cov_out = symmetrize(&(sigma_a - &sigma_ab * x));
    let mean_out = mean_a + &sigma_ab * DVector::from_column_slice(y.as_slice());
    Ok(GaussianOperator::from_parts(
        mean_out,
        cov_out,
        OperatorKind::State,
    ))
}

fn gather(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::QuadratureDirection;
    use approx::assert_relative_eq;

    #[test]
    fn uncorrelated_parts_stay_unchanged() {
        // vacuum ⊗ vacuum has σ_AB = 0: conditioning mode 1 does nothing to
        // mode 0 beyond keeping its moments.
        let joint = GaussianOperator::vacuum(2).unwrap();
        let effect = GaussianOperator::coherent_effect(1.3, -0.4).unwrap();
        let out = condition_on_effect(&joint, &[1], &effect).unwrap();
        assert_eq!(out.n_modes(), 1);
        assert_relative_eq!(out.cov(), GaussianOperator::vacuum(1).unwrap().cov(), epsilon = 1e-14);
        assert_relative_eq!(out.mean()[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(out.mean()[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn epr_conditioning_steers_the_partner_mode() {
        // Sharp x2 measurement on a two-mode squeezed state pulls the x1
        // conditional variance down to cosh(s)/2 - sinh²(s)/(2 cosh(s)) =
        // 1/(2 cosh s).
        let s = 1.2_f64;
        let joint = GaussianOperator::two_mode_squeezed(s).unwrap();
        let outcome = 0.9;
        let effect = GaussianOperator::homodyne_effect(
            QuadratureDirection::new(0, 0.0),
            outcome,
            1e-10,
        )
        .unwrap();
        let out = condition_on_effect(&joint, &[1], &effect).unwrap();
        let var_x1 = out.cov()[(0, 0)];
        assert_relative_eq!(var_x1, 1.0 / (2.0 * s.cosh()), epsilon = 1e-7);
        // The conditional mean follows the outcome through the x1-x2
        // correlation coefficient tanh(s).
        assert_relative_eq!(out.mean()[0], s.tanh() * outcome, epsilon = 1e-7);
    }

    #[test]
    fn conditional_covariance_stays_positive_definite() {
        let s = 2.0;
        let joint = GaussianOperator::two_mode_squeezed(s).unwrap();
        let effect = GaussianOperator::coherent_effect(0.3, 0.1).unwrap();
        let out = condition_on_effect(&joint, &[0], &effect).unwrap();
        let report = out.validate();
        assert!(report.positive_definite);
        assert!(crate::linalg::symmetry_defect(out.cov()) < 1e-14);
    }

    #[test]
    fn regularizer_convergence_toward_sharp_limit() {
        // The eps-regularized homodyne effect converges to the projective
        // limit: successive refinements move the conditional moments less
        // and less.
        let joint = GaussianOperator::two_mode_squeezed(1.0).unwrap();
        let dir = QuadratureDirection::new(0, 0.4);
        let var_at = |eps: f64| {
            let effect = GaussianOperator::homodyne_effect(dir, 0.5, eps).unwrap();
            let out = condition_on_effect(&joint, &[1], &effect).unwrap();
            out.cov()[(0, 0)]
        };
        let d1 = (var_at(1e-4) - var_at(1e-6)).abs();
        let d2 = (var_at(1e-6) - var_at(1e-8)).abs();
        assert!(d2 < d1 / 10.0, "refinement did not converge: {d1} vs {d2}");
    }

    #[test]
    fn measured_set_must_be_proper() {
        let joint = GaussianOperator::vacuum(2).unwrap();
        let effect1 = GaussianOperator::coherent_effect(0.0, 0.0).unwrap();
        assert!(condition_on_effect(&joint, &[], &effect1).is_err());
        let effect2 = GaussianOperator::two_mode_squeezed_effect(0.0, DVector::zeros(4)).unwrap();
        assert!(condition_on_effect(&joint, &[0, 1], &effect2).is_err());
    }

    #[test]
    fn effect_mode_count_must_match() {
        let joint = GaussianOperator::vacuum(3).unwrap();
        let effect = GaussianOperator::coherent_effect(0.0, 0.0).unwrap();
        assert!(condition_on_effect(&joint, &[0, 1], &effect).is_err());
    }

    #[test]
    fn oversharp_regularizer_reports_singularity() {
        let joint = GaussianOperator::two_mode_squeezed(0.5).unwrap();
        let effect = GaussianOperator::homodyne_effect(
            QuadratureDirection::new(0, 0.0),
            0.0,
            1e-15,
        )
        .unwrap();
        assert!(matches!(
            condition_on_effect(&joint, &[1], &effect),
            Err(GaussianError::NumericalSingularity(_))
        ));
    }
}
