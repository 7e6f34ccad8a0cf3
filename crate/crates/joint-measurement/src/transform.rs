use gaussian_core::{LinearPhaseSpaceMap, VectorLayout};
use nalgebra::DMatrix;

use crate::{Result, Scenario};

/// Antisymmetric matrix of quadrature commutators among the meter
/// directions: `C_ij = sin(angles[i] - angles[j])`.
///
/// This is the back-action bookkeeping of the simultaneous coupling: meter
/// `i`'s momentum picks up `(1/2) Σ_j C_ij q_j` from the other meters'
/// positions.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorMatrix {
    matrix: DMatrix<f64>,
}

impl CommutatorMatrix {
    pub fn new(angles: &[f64]) -> Self {
        let m = angles.len();
        let matrix = DMatrix::from_fn(m, m, |i, j| (angles[i] - angles[j]).sin());
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Phase-space transformation of the impulsive meter-bank interaction, in
/// blocked meter coordinates `(q1..qm, pi1..pim, x1, p1, x2, p2)`:
///
/// ```text
/// q_i  -> q_i
/// pi_i -> pi_i + x1 cos(phi_i) + p1 sin(phi_i) + (1/2) Σ_j C_ij q_j
/// x1   -> x1 - Σ_i sin(phi_i) q_i
/// p1   -> p1 + Σ_i cos(phi_i) q_i
/// x2, p2 untouched
/// ```
///
/// The returned map carries its layout; applying it to interleaved
/// operators goes through the explicit permutation. The map is symplectic
/// for every angle set.
pub fn build_transform(scenario: &Scenario) -> Result<LinearPhaseSpaceMap> {
    let m = scenario.meters;
    let dim = 2 * (m + 2);
    let c = CommutatorMatrix::new(&scenario.angles);
    let mut l = DMatrix::identity(dim, dim);

    let (x1, p1) = (2 * m, 2 * m + 1);
    for i in 0..m {
        let (cos_i, sin_i) = (scenario.angles[i].cos(), scenario.angles[i].sin());
        let pi_i = m + i;
        // Meter momentum reads the coupled quadrature plus half the
        // commutator back-action from the other meters' positions.
        l[(pi_i, x1)] = cos_i;
        l[(pi_i, p1)] = sin_i;
        for j in 0..m {
            l[(pi_i, j)] = 0.5 * c.matrix()[(i, j)];
        }
        // Back-action on the probed system mode.
        l[(x1, i)] = -sin_i;
        l[(p1, i)] = cos_i;
    }

    Ok(LinearPhaseSpaceMap::with_layout(
        l,
        VectorLayout::BlockedPrefix { modes: m },
    )?)
}
