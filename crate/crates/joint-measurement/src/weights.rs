use gaussian_core::GaussianError;
use nalgebra::{DMatrix, DVector};
use retrodiction::squeezed_pair_variance;

use crate::{JointMeasurementError, Result, Scenario};

/// Constraint residual above which a weight vector is rejected.
const CONSTRAINT_TOL: f64 = 1e-9;

/// Recombination weights for estimating the quadrature at `angles[k]` from
/// the postselected meter momenta.
///
/// The weights minimize the variance `dᵀ σ'_pi d` subject to the two
/// moment-matching constraints
///
/// ```text
/// Σ_i d_i cos(phi_i - phi_k) = 1,   Σ_i d_i sin(phi_i - phi_k) = 0,
/// ```
///
/// which pin the estimate to the retrodicted mean of `x_{phi_k}`. For
/// three or more equidistant meters the minimizer is the closed form
/// `d_i = (2/m) cos(phi_i - phi_k)`; every other case goes through the
/// constrained quadratic program of [`min_variance_weights`]. (For `m = 1`
/// and the antipodal `m = 2` grid the closed form violates the
/// constraints, so the program is the general path, not a fallback.)
pub fn optimal_weights(scenario: &Scenario, k: usize) -> Result<DVector<f64>> {
    if k >= scenario.meters {
        return Err(GaussianError::InvalidArgument(format!(
            "target index {k} out of range for {} meters",
            scenario.meters
        ))
        .into());
    }
    optimal_weights_for_angle(scenario, scenario.angles[k])
}

/// Same as [`optimal_weights`] for an arbitrary target angle, which need
/// not be one of the meter angles. Infeasible when the meter geometry
/// cannot reproduce the target direction (for example a single meter at a
/// different angle).
pub fn optimal_weights_for_angle(scenario: &Scenario, target: f64) -> Result<DVector<f64>> {
    if !target.is_finite() {
        return Err(GaussianError::InvalidArgument(
            "target angle must be finite".into(),
        )
        .into());
    }
    let weights = if scenario.is_equidistant() && scenario.meters >= 3 {
        let m = scenario.meters as f64;
        DVector::from_iterator(
            scenario.meters,
            scenario.angles.iter().map(|&phi| 2.0 / m * (phi - target).cos()),
        )
    } else {
        let sigma = crate::retrodicted_pi_cov_closed_form(scenario);
        min_variance_weights(&sigma, &scenario.angles, target)?
    };
    check_constraints(&weights, &scenario.angles, target)?;
    Ok(weights)
}

/// Minimum of `dᵀ σ d` over the moment-matching constraint set, for an
/// arbitrary symmetric positive definite covariance.
///
/// The two constraints are reduced to an orthonormal, consistent set by a
/// singular value decomposition (dropping redundant directions, e.g. the
/// vanishing sine constraint of a single aligned meter), then solved as a
/// saddle-point system
///
/// ```text
/// [ 2σ   V ] [d]   [0]
/// [ Vᵀ   0 ] [λ] = [c]
/// ```
///
/// Constraint directions that cannot be represented by the meter angles
/// make the problem infeasible.
pub fn min_variance_weights(
    sigma: &DMatrix<f64>,
    angles: &[f64],
    target: f64,
) -> Result<DVector<f64>> {
    let m = angles.len();
    if sigma.nrows() != m || sigma.ncols() != m {
        return Err(GaussianError::InvalidArgument(format!(
            "covariance is {}x{} for {m} meters",
            sigma.nrows(),
            sigma.ncols()
        ))
        .into());
    }
    let a = DMatrix::from_fn(2, m, |r, i| {
        let delta = angles[i] - target;
        if r == 0 {
            delta.cos()
        } else {
            delta.sin()
        }
    });
    let b = DVector::from_vec(vec![1.0, 0.0]);

    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |acc, &v| acc.max(v));
    let rank_tol = smax * 1e-12;
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rank_tol)
        .collect();

    // Consistency: b must lie in the span of the kept left singular vectors.
    let mut residual = b.clone();
    for &i in &kept {
        let ui = u.column(i);
        residual -= ui * ui.dot(&b);
    }
    if residual.norm() > CONSTRAINT_TOL {
        return Err(JointMeasurementError::InfeasibleConstraints(format!(
            "target angle {target} is outside the span of the meter angles"
        )));
    }

    let r = kept.len();
    let dim = m + r;
    let mut kkt = DMatrix::zeros(dim, dim);
    kkt.view_mut((0, 0), (m, m)).copy_from(&(2.0 * sigma));
    let mut rhs = DVector::zeros(dim);
    for (col, &i) in kept.iter().enumerate() {
        for row in 0..m {
            kkt[(row, m + col)] = vt[(i, row)];
            kkt[(m + col, row)] = vt[(i, row)];
        }
        rhs[m + col] = u.column(i).dot(&b) / svd.singular_values[i];
    }

    let solution = kkt.lu().solve(&rhs).ok_or_else(|| {
        JointMeasurementError::InfeasibleConstraints(
            "degenerate constraint system for the meter geometry".into(),
        )
    })?;
    Ok(solution.rows(0, m).into_owned())
}

fn check_constraints(weights: &DVector<f64>, angles: &[f64], target: f64) -> Result<()> {
    let cos_sum: f64 = weights
        .iter()
        .zip(angles)
        .map(|(d, &phi)| d * (phi - target).cos())
        .sum();
    let sin_sum: f64 = weights
        .iter()
        .zip(angles)
        .map(|(d, &phi)| d * (phi - target).sin())
        .sum();
    if (cos_sum - 1.0).abs() > CONSTRAINT_TOL || sin_sum.abs() > CONSTRAINT_TOL {
        return Err(JointMeasurementError::InfeasibleConstraints(format!(
            "constraint residuals ({:.3e}, {:.3e})",
            cos_sum - 1.0,
            sin_sum
        )));
    }
    Ok(())
}

/// Variance of the recombined estimate `Σ_i d_i pi_i` of `x_{angles[k]}`.
///
/// Evaluates `dᵀ σ'_pi d` through the structure of the postselected
/// covariance, `σ'_pi = I/(2z) + B (c cᵀ + s sᵀ)` with
/// `c_i = cos(phi_i)`, `s_i = sin(phi_i)`, which keeps the cost linear in
/// the number of meters; the decomposition is pinned against the full
/// conditioning path by tests. For equidistant angles the value collapses
/// to `1/(m z) + B` ([`equidistant_combination_variance`]) and never
/// exceeds the single-meter entry `1/(2z) + B`.
pub fn optimal_combination_variance(scenario: &Scenario, k: usize) -> Result<f64> {
    let weights = optimal_weights(scenario, k)?;
    let bracket = squeezed_pair_variance(scenario.state_squeezing, scenario.effect_squeezing);
    let norm_sq: f64 = weights.iter().map(|d| d * d).sum();
    let dc: f64 = weights
        .iter()
        .zip(&scenario.angles)
        .map(|(d, &phi)| d * phi.cos())
        .sum();
    let ds: f64 = weights
        .iter()
        .zip(&scenario.angles)
        .map(|(d, &phi)| d * phi.sin())
        .sum();
    Ok(norm_sq / (2.0 * scenario.meter_squeezing) + bracket * (dc * dc + ds * ds))
}

/// Closed-form recombined variance `1/(m z) + B` for three or more
/// equidistant meters.
pub fn equidistant_combination_variance(scenario: &Scenario) -> f64 {
    let bracket = squeezed_pair_variance(scenario.state_squeezing, scenario.effect_squeezing);
    1.0 / (scenario.meters as f64 * scenario.meter_squeezing) + bracket
}
