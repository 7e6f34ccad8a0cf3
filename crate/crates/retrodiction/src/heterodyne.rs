use gaussian_core::linalg::{spd_solve, spd_solve_vec, symmetrize};
use gaussian_core::GaussianError;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{PqsPair, Result};

/// Mean and covariance of a retrodicted heterodyne (joint x, p) outcome
/// distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterodyneRetrodiction {
    /// `(x, p)` center of the outcome density.
    pub mean: [f64; 2],
    /// 2x2 covariance of the outcome density (row-major order in JSON).
    pub cov: [[f64; 2]; 2],
}

impl HeterodyneRetrodiction {
    /// Product of the x and p standard deviations; 1/2 when both members
    /// of the pair are coherent, matching the ordinary Heisenberg bound.
    pub fn uncertainty_product(&self) -> f64 {
        (self.cov[0][0] * self.cov[1][1]).sqrt()
    }
}

/// Retrodicted heterodyne outcome density: the normalized product of the
/// Husimi functions of state and effect.
///
/// Each Husimi function is the Gaussian with covariance `σ + I/2` (the
/// half-quantum of detection noise added by the joint measurement); their
/// product is the precision-weighted combination of the two broadened
/// Gaussians. An uninformative effect (covariance -> ∞) degrades
/// continuously to the Husimi function of the state alone.
pub fn heterodyne_retrodiction(pair: &PqsPair) -> Result<HeterodyneRetrodiction> {
    if pair.n_modes() != 1 {
        return Err(GaussianError::InvalidArgument(format!(
            "heterodyne retrodiction needs a 1-mode pair, got {} modes",
            pair.n_modes()
        )));
    }
    let half = DMatrix::identity(2, 2) * 0.5;
    let husimi_rho = pair.rho().cov() + &half;
    let husimi_eff = pair.effect().cov() + &half;

    let total = &husimi_rho + &husimi_eff;
    let x = spd_solve(&total, &husimi_rho, "summed Husimi covariances")?;
    let cov = symmetrize(&(&husimi_rho - &husimi_rho * x));
    let shift = spd_solve_vec(
        &total,
        &DVector::from_iterator(
            2,
            pair.effect()
                .mean()
                .iter()
                .zip(pair.rho().mean().iter())
                .map(|(e, r)| e - r),
        ),
        "summed Husimi covariances",
    )?;
    let mean = pair.rho().mean() + husimi_rho * shift;

    Ok(HeterodyneRetrodiction {
        mean: [mean[0], mean[1]],
        cov: [
            [cov[(0, 0)], cov[(0, 1)]],
            [cov[(1, 0)], cov[(1, 1)]],
        ],
    })
}
