use gaussian_core::linalg::{spd_solve, spd_solve_vec, symmetrize};
use gaussian_core::{
    GaussianError, GaussianOperator, OperatorKind, QuadratureDirection, ScalarGaussian,
};

use crate::{Provenance, Result, RetrodictionResult};

/// Retrodicted distribution of `x_phi` on one mode of a two-mode pair.
///
/// The state and effect are combined into the precision-weighted Gaussian
///
/// ```text
/// Σ = (σ_ρ⁻¹ + σ_E⁻¹)⁻¹,   r̄ = Σ (σ_ρ⁻¹ r̄_ρ + σ_E⁻¹ r̄_E)
/// ```
///
/// (evaluated in the equivalent solve form `σ_ρ - σ_ρ (σ_ρ + σ_E)⁻¹ σ_ρ`),
/// and the result is the projection of that Gaussian onto the `x_phi`
/// quadrature of `dir.mode`.
///
/// When ρ and E are the standard two-mode squeezed forms with parameters
/// `s` and `s'`, the variance collapses to the angle-independent closed
/// form of [`squeezed_pair_variance`], which serves as the test oracle for
/// this path.
pub fn pqs_two_mode(
    rho: &GaussianOperator,
    effect: &GaussianOperator,
    dir: QuadratureDirection,
) -> Result<RetrodictionResult> {
    if rho.n_modes() != 2 || effect.n_modes() != 2 {
        return Err(GaussianError::InvalidArgument(
            "two-mode retrodiction needs 2-mode state and effect".into(),
        ));
    }
    if rho.kind() != OperatorKind::State || effect.kind() != OperatorKind::Effect {
        return Err(GaussianError::InvalidArgument(
            "expected (state, effect) pair".into(),
        ));
    }
    if dir.mode >= 2 {
        return Err(GaussianError::InvalidArgument(format!(
            "direction mode {} out of range for 2 modes",
            dir.mode
        )));
    }
    if !dir.phi.is_finite() {
        return Err(GaussianError::InvalidArgument(
            "direction angle must be finite".into(),
        ));
    }

    let total = rho.cov() + effect.cov();
    let x = spd_solve(&total, rho.cov(), "combined covariance σ_ρ + σ_E")?;
    let combined_cov = symmetrize(&(rho.cov() - rho.cov() * &x));
    let shift = spd_solve_vec(
        &total,
        &(effect.mean() - rho.mean()),
        "combined covariance σ_ρ + σ_E",
    )?;
    let combined_mean = rho.mean() + rho.cov() * shift;

    let b = 2 * dir.mode;
    let block = combined_cov.view((b, b), (2, 2));
    let [c, s] = dir.unit();
    let variance = block[(0, 0)] * c * c + 2.0 * block[(0, 1)] * c * s + block[(1, 1)] * s * s;
    let mean = c * combined_mean[b] + s * combined_mean[b + 1];
    Ok(RetrodictionResult {
        distribution: ScalarGaussian::new(mean, variance),
        direction: dir,
        provenance: Provenance::TwoModeEpr,
    })
}

/// Closed-form retrodicted variance for the standard two-mode squeezed
/// state (parameter `s`) paired with the two-mode squeezed effect
/// (parameter `s_prime`):
///
/// ```text
/// σ_P = (cosh s + cosh s') / (4 (1 + cosh(s - s')))
/// ```
///
/// Independent of the quadrature angle; for `s_prime = -s` it equals
/// `1/(4 cosh s)` and can be made arbitrarily small.
pub fn squeezed_pair_variance(s: f64, s_prime: f64) -> f64 {
    (s.cosh() + s_prime.cosh()) / (4.0 * (1.0 + (s - s_prime).cosh()))
}

/// Closed-form retrodicted mean for the standard two-mode squeezed forms
/// with arbitrary displacements:
///
/// ```text
/// x̄_P(phi) = cos(phi) (x̄₁ρ + x̄₁E)/2 + sin(phi) (p̄₁ρ + p̄₁E)/2
///          + sinh(s - s') / (2 (1 + cosh(s - s'))) ·
///            [cos(phi) (x̄₂E - x̄₂ρ) - sin(phi) (p̄₂E - p̄₂ρ)]
/// ```
///
/// `rho_means` and `effect_means` are `(x1, p1, x2, p2)` displacement
/// vectors. For `s = s'` the second-mode term vanishes.
pub fn squeezed_pair_mean(
    s: f64,
    s_prime: f64,
    rho_means: &[f64; 4],
    effect_means: &[f64; 4],
    phi: f64,
) -> f64 {
    let (c, sn) = (phi.cos(), phi.sin());
    let first = c * (rho_means[0] + effect_means[0]) / 2.0 + sn * (rho_means[1] + effect_means[1]) / 2.0;
    let gain = (s - s_prime).sinh() / (2.0 * (1.0 + (s - s_prime).cosh()));
    let x2 = effect_means[2] - rho_means[2];
    let p2 = effect_means[3] - rho_means[3];
    first + gain * (c * x2 - sn * p2)
}
