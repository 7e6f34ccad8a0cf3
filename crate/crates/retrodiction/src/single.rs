use gaussian_core::{GaussianError, QuadratureDirection, ScalarGaussian};

use crate::{PqsPair, Provenance, Result, RetrodictionResult};

fn require_single_mode(pair: &PqsPair) -> Result<()> {
    if pair.n_modes() != 1 {
        return Err(GaussianError::InvalidArgument(format!(
            "single-mode retrodiction needs a 1-mode pair, got {} modes",
            pair.n_modes()
        )));
    }
    Ok(())
}

/// Variance of the retrodicted outcome distribution of `x_phi`: the
/// harmonic combination
///
/// ```text
/// σ_P(x_phi) = (1/σ_{ρ,x_phi} + 1/σ_{E,x_phi})⁻¹
/// ```
///
/// of the rotated variances of state and effect. This is always at most
/// the smaller of the two, so posterior information never hurts.
pub fn pqs_variance_single(pair: &PqsPair, dir: QuadratureDirection) -> Result<f64> {
    require_single_mode(pair)?;
    let var_rho = pair.rho().rotated_variance(dir)?;
    let var_eff = pair.effect().rotated_variance(dir)?;
    Ok(1.0 / (1.0 / var_rho + 1.0 / var_eff))
}

/// Full retrodicted distribution of `x_phi`: the normalized product of the
/// two Gaussian marginals. The mean is precision-weighted,
/// `(σ_E μ_ρ + σ_ρ μ_E) / (σ_ρ + σ_E)`, which is both the mode and the
/// mean of the product density and hence the best guess for the unrecorded
/// outcome.
pub fn pqs_distribution_single(
    pair: &PqsPair,
    dir: QuadratureDirection,
) -> Result<RetrodictionResult> {
    require_single_mode(pair)?;
    let rho = pair.rho().marginal(dir)?;
    let eff = pair.effect().marginal(dir)?;
    let mean = (eff.variance * rho.mean + rho.variance * eff.mean) / (rho.variance + eff.variance);
    let variance = 1.0 / (1.0 / rho.variance + 1.0 / eff.variance);
    Ok(RetrodictionResult {
        distribution: ScalarGaussian::new(mean, variance),
        direction: dir,
        provenance: Provenance::SingleMode,
    })
}

/// Retrodicted variance swept over a grid of quadrature angles — the polar
/// curves whose squeezed lobes make the variance product dip below the
/// Heisenberg bound.
pub fn butterfly_curve(pair: &PqsPair, phi_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if phi_grid.is_empty() {
        return Err(GaussianError::InvalidArgument(
            "butterfly curve needs a nonempty angle grid".into(),
        ));
    }
    phi_grid
        .iter()
        .map(|&phi| {
            pqs_variance_single(pair, QuadratureDirection::new(0, phi)).map(|v| (phi, v))
        })
        .collect()
}
