use gaussian_core::{GaussianError, GaussianOperator, OperatorKind, QuadratureDirection, ScalarGaussian};
use serde::{Deserialize, Serialize};

use crate::Result;

/// The pair (ρ, E) from which conditional probabilities of past
/// measurement outcomes are computed: a prepared state and the effect left
/// behind by everything measured afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqsPair {
    rho: GaussianOperator,
    effect: GaussianOperator,
}

impl PqsPair {
    /// Pair up a state and an effect on the same number of modes. The
    /// state must be Heisenberg-admissible.
    pub fn new(rho: GaussianOperator, effect: GaussianOperator) -> Result<Self> {
        if rho.kind() != OperatorKind::State {
            return Err(GaussianError::InvalidArgument(
                "first member of a retrodiction pair must be a state".into(),
            ));
        }
        if effect.kind() != OperatorKind::Effect {
            return Err(GaussianError::InvalidArgument(
                "second member of a retrodiction pair must be an effect".into(),
            ));
        }
        if rho.n_modes() != effect.n_modes() {
            return Err(GaussianError::InvalidArgument(format!(
                "state has {} modes but effect has {}",
                rho.n_modes(),
                effect.n_modes()
            )));
        }
        if !rho.validate().admissible {
            return Err(GaussianError::InvalidArgument(
                "state violates the Heisenberg admissibility bound".into(),
            ));
        }
        Ok(Self { rho, effect })
    }

    pub fn rho(&self) -> &GaussianOperator {
        &self.rho
    }

    pub fn effect(&self) -> &GaussianOperator {
        &self.effect
    }

    pub fn n_modes(&self) -> usize {
        self.rho.n_modes()
    }
}

/// Which retrodiction path produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SingleMode,
    TwoModeEpr,
    Heterodyne,
}

/// A retrodicted outcome distribution for one quadrature direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrodictionResult {
    pub distribution: ScalarGaussian,
    pub direction: QuadratureDirection,
    pub provenance: Provenance,
}
