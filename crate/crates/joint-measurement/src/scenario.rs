use gaussian_core::{GaussianError, GaussianOperator};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::Result;

/// Tolerance for recognizing an equidistant angle grid.
pub(crate) const EQUIDISTANT_TOL: f64 = 1e-9;

/// A complete meter-bank measurement scenario.
///
/// `meters` oscillators, each prepared with position variance `z/2` and
/// momentum variance `1/(2z)`, couple to the quadratures `x_{angles[i]}`
/// of the first mode of a two-mode squeezed system (parameter
/// `state_squeezing`). The final joint measurement on the system pair is a
/// two-mode squeezed effect with parameter `effect_squeezing`, displaced by
/// `effect_means` — the shot-to-shot random outcome enters only there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    /// Number of meters, `m >= 1`.
    pub meters: usize,
    /// Meter squeezing `z > 0`.
    pub meter_squeezing: f64,
    /// Squeezing `s` of the prepared two-mode system state.
    pub state_squeezing: f64,
    /// Squeezing `s'` of the final two-mode effect. Negative values squeeze
    /// `x1 + x2` and `p1 - p2`, the favorable direction for retrodiction.
    pub effect_squeezing: f64,
    /// Meter coupling angles; defaults to `2·pi·j / m`.
    pub angles: Vec<f64>,
    /// `(x1, p1, x2, p2)` displacement of the system state.
    pub state_means: [f64; 4],
    /// `(x1, p1, x2, p2)` displacement of the final effect.
    pub effect_means: [f64; 4],
    /// Initial meter means, interleaved `(q1, pi1, q2, pi2, ...)`.
    pub meter_means: Vec<f64>,
}

impl Scenario {
    /// Scenario with the default equidistant angles and zero means.
    pub fn equidistant(
        meters: usize,
        meter_squeezing: f64,
        state_squeezing: f64,
        effect_squeezing: f64,
    ) -> Result<Self> {
        let angles = default_angles(meters);
        Self::build(
            meters,
            meter_squeezing,
            state_squeezing,
            effect_squeezing,
            angles,
            [0.0; 4],
            [0.0; 4],
            vec![0.0; 2 * meters],
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        meters: usize,
        meter_squeezing: f64,
        state_squeezing: f64,
        effect_squeezing: f64,
        angles: Vec<f64>,
        state_means: [f64; 4],
        effect_means: [f64; 4],
        meter_means: Vec<f64>,
    ) -> Result<Self> {
        let scenario = Self {
            meters,
            meter_squeezing,
            state_squeezing,
            effect_squeezing,
            angles,
            state_means,
            effect_means,
            meter_means,
        };
        scenario.check()?;
        Ok(scenario)
    }

    pub fn with_angles(mut self, angles: Vec<f64>) -> Result<Self> {
        self.angles = angles;
        self.check()?;
        Ok(self)
    }

    pub fn with_state_means(mut self, means: [f64; 4]) -> Result<Self> {
        self.state_means = means;
        self.check()?;
        Ok(self)
    }

    pub fn with_effect_means(mut self, means: [f64; 4]) -> Result<Self> {
        self.effect_means = means;
        self.check()?;
        Ok(self)
    }

    pub fn with_meter_means(mut self, means: Vec<f64>) -> Result<Self> {
        self.meter_means = means;
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        if self.meters == 0 {
            return Err(GaussianError::InvalidArgument(
                "scenario needs at least one meter".into(),
            )
            .into());
        }
        if !(self.meter_squeezing > 0.0 && self.meter_squeezing.is_finite()) {
            return Err(GaussianError::InvalidArgument(format!(
                "meter squeezing must be positive and finite, got {}",
                self.meter_squeezing
            ))
            .into());
        }
        if !self.state_squeezing.is_finite() || !self.effect_squeezing.is_finite() {
            return Err(GaussianError::InvalidArgument(
                "squeezing parameters must be finite".into(),
            )
            .into());
        }
        if self.angles.len() != self.meters {
            return Err(GaussianError::InvalidArgument(format!(
                "{} angles for {} meters",
                self.angles.len(),
                self.meters
            ))
            .into());
        }
        if self.meter_means.len() != 2 * self.meters {
            return Err(GaussianError::InvalidArgument(format!(
                "meter means length {} != 2 * {}",
                self.meter_means.len(),
                self.meters
            ))
            .into());
        }
        let finite = self.angles.iter().all(|v| v.is_finite())
            && self.meter_means.iter().all(|v| v.is_finite())
            && self.state_means.iter().all(|v| v.is_finite())
            && self.effect_means.iter().all(|v| v.is_finite());
        if !finite {
            return Err(
                GaussianError::InvalidArgument("scenario entries must be finite".into()).into(),
            );
        }
        Ok(())
    }

    /// Meters plus the two system modes.
    pub fn total_modes(&self) -> usize {
        self.meters + 2
    }

    /// Interleaved index of meter `i`'s momentum in the joint vector.
    pub fn pi_index(&self, meter: usize) -> usize {
        2 * meter + 1
    }

    /// Mode indices of the two system modes in the joint vector.
    pub fn system_modes(&self) -> [usize; 2] {
        [self.meters, self.meters + 1]
    }

    /// Whether the angles form an equidistant grid `angles[0] + 2·pi·j/m`.
    pub fn is_equidistant(&self) -> bool {
        let m = self.meters as f64;
        self.angles.iter().enumerate().all(|(j, &phi)| {
            let expected = self.angles[0] + std::f64::consts::TAU * j as f64 / m;
            (phi - expected).abs() < EQUIDISTANT_TOL
        })
    }

    /// Joint initial state: meters `diag(z/2, 1/(2z))` each, tensored with
    /// the two-mode squeezed system, in interleaved ordering with the
    /// system last.
    pub fn initial_state(&self) -> Result<GaussianOperator> {
        let n = self.total_modes();
        let dim = 2 * n;
        let mut cov = DMatrix::zeros(dim, dim);
        let mut mean = DVector::zeros(dim);
        let z = self.meter_squeezing;
        for i in 0..self.meters {
            cov[(2 * i, 2 * i)] = z / 2.0;
            cov[(2 * i + 1, 2 * i + 1)] = 1.0 / (2.0 * z);
            mean[2 * i] = self.meter_means[2 * i];
            mean[2 * i + 1] = self.meter_means[2 * i + 1];
        }
        let system = GaussianOperator::two_mode_squeezed(self.state_squeezing)?;
        let base = 2 * self.meters;
        cov.view_mut((base, base), (4, 4)).copy_from(system.cov());
        for k in 0..4 {
            mean[base + k] = self.state_means[k];
        }
        Ok(GaussianOperator::state(mean, cov)?)
    }

    /// The final two-mode effect on the system pair.
    pub fn epr_effect(&self) -> Result<GaussianOperator> {
        Ok(GaussianOperator::two_mode_squeezed_effect(
            self.effect_squeezing,
            DVector::from_row_slice(&self.effect_means),
        )?)
    }
}

pub(crate) fn default_angles(meters: usize) -> Vec<f64> {
    (0..meters)
        .map(|j| std::f64::consts::TAU * j as f64 / meters as f64)
        .collect()
}

/// JSON form of [`Scenario`]: angles and means may be omitted and default
/// to the equidistant grid and zero displacements.
#[derive(Deserialize)]
struct ScenarioRepr {
    meters: usize,
    meter_squeezing: f64,
    state_squeezing: f64,
    effect_squeezing: f64,
    #[serde(default)]
    angles: Option<Vec<f64>>,
    #[serde(default)]
    state_means: Option<[f64; 4]>,
    #[serde(default)]
    effect_means: Option<[f64; 4]>,
    #[serde(default)]
    meter_means: Option<Vec<f64>>,
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = ScenarioRepr::deserialize(deserializer)?;
        let angles = repr.angles.unwrap_or_else(|| default_angles(repr.meters));
        let meter_means = repr.meter_means.unwrap_or_else(|| vec![0.0; 2 * repr.meters]);
        Scenario::build(
            repr.meters,
            repr.meter_squeezing,
            repr.state_squeezing,
            repr.effect_squeezing,
            angles,
            repr.state_means.unwrap_or([0.0; 4]),
            repr.effect_means.unwrap_or([0.0; 4]),
            meter_means,
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equidistant_grid_detection() {
        let s = Scenario::equidistant(4, 1.0, 0.0, 0.0).unwrap();
        assert!(s.is_equidistant());
        let shifted = s
            .clone()
            .with_angles(vec![0.3, 0.3 + std::f64::consts::FRAC_PI_2, 0.3 + std::f64::consts::PI, 0.3 + 1.5 * std::f64::consts::PI])
            .unwrap();
        assert!(shifted.is_equidistant());
        let skew = s.with_angles(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(!skew.is_equidistant());
    }

    #[test]
    fn initial_state_blocks() {
        let s = Scenario::equidistant(2, 4.0, 1.0, 0.0)
            .unwrap()
            .with_meter_means(vec![0.1, 0.2, 0.3, 0.4])
            .unwrap()
            .with_state_means([1.0, -1.0, 0.5, -0.5])
            .unwrap();
        let st = s.initial_state().unwrap();
        assert_eq!(st.n_modes(), 4);
        assert_relative_eq!(st.cov()[(0, 0)], 2.0, epsilon = 1e-15);
        assert_relative_eq!(st.cov()[(1, 1)], 0.125, epsilon = 1e-15);
        assert_relative_eq!(st.cov()[(4, 4)], 1.0_f64.cosh() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(st.cov()[(4, 6)], 1.0_f64.sinh() / 2.0, epsilon = 1e-15);
        assert_eq!(st.mean()[2], 0.3);
        assert_eq!(st.mean()[4], 1.0);
        // Meters and system are initially uncorrelated.
        assert_eq!(st.cov()[(0, 4)], 0.0);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(Scenario::equidistant(0, 1.0, 0.0, 0.0).is_err());
        assert!(Scenario::equidistant(2, 0.0, 0.0, 0.0).is_err());
        assert!(Scenario::equidistant(2, -1.0, 0.0, 0.0).is_err());
        assert!(Scenario::equidistant(2, 1.0, f64::NAN, 0.0).is_err());
        assert!(Scenario::equidistant(2, 1.0, 0.0, 0.0)
            .unwrap()
            .with_angles(vec![0.0])
            .is_err());
    }

    #[test]
    fn json_defaults_fill_in() {
        let s: Scenario = serde_json::from_str(
            r#"{"meters": 3, "meter_squeezing": 1.0, "state_squeezing": 2.0, "effect_squeezing": -2.0}"#,
        )
        .unwrap();
        assert_eq!(s.angles.len(), 3);
        assert_relative_eq!(s.angles[1], std::f64::consts::TAU / 3.0, epsilon = 1e-15);
        assert_eq!(s.meter_means, vec![0.0; 6]);

        let round: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(round, s);
    }
}
