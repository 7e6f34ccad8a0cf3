use gaussian_core::linalg::matrix_to_rows;
use gaussian_core::{condition_on_effect, GaussianOperator};
use nalgebra::{DMatrix, DVector};
use retrodiction::{squeezed_pair_mean, squeezed_pair_variance};
use serde::Serialize;

use crate::{build_transform, Result, Scenario};

/// First and second moments of the meter momentum readouts.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterStatistics {
    pub pi_mean: DVector<f64>,
    pub pi_cov: DMatrix<f64>,
    /// Whether these statistics are conditioned on the final system
    /// measurement.
    pub postselected: bool,
}

impl MeterStatistics {
    pub fn meters(&self) -> usize {
        self.pi_mean.len()
    }

    /// Covariance entries as `(i, j, value)` rows for CSV-style output
    /// (upper triangle including the diagonal).
    pub fn cov_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.meters();
        (0..m).flat_map(move |i| (i..m).map(move |j| (i, j, self.pi_cov[(i, j)])))
    }
}

impl Serialize for MeterStatistics {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            pi_mean: Vec<f64>,
            pi_cov: Vec<Vec<f64>>,
            postselected: bool,
        }
        Repr {
            pi_mean: self.pi_mean.iter().copied().collect(),
            pi_cov: matrix_to_rows(&self.pi_cov),
            postselected: self.postselected,
        }
        .serialize(serializer)
    }
}

fn pi_block(scenario: &Scenario, op: &GaussianOperator) -> MeterStatistics {
    let m = scenario.meters;
    let idx: Vec<usize> = (0..m).map(|i| scenario.pi_index(i)).collect();
    let pi_mean = DVector::from_iterator(m, idx.iter().map(|&i| op.mean()[i]));
    let pi_cov = DMatrix::from_fn(m, m, |i, j| op.cov()[(idx[i], idx[j])]);
    MeterStatistics {
        pi_mean,
        pi_cov,
        postselected: false,
    }
}

/// Meter momentum statistics conditioned only on the initial preparation:
/// propagate the joint covariance through the interaction (`L σ Lᵀ`) and
/// read off the momentum block.
///
/// Each diagonal entry equals
/// `1/(2z) + z Σ_j sin²(phi_i - phi_j)/8 + cosh(s)/2`
/// (see [`predicted_pi_variances`]): squeezing the meter momenta buys
/// readout precision but feeds the anti-squeezed meter positions back into
/// every non-commuting partner.
pub fn predicted_meter_stats(scenario: &Scenario) -> Result<MeterStatistics> {
    let l = build_transform(scenario)?;
    let evolved = l.apply(&scenario.initial_state()?).map_err(crate::JointMeasurementError::from)?;
    Ok(pi_block(scenario, &evolved))
}

/// Closed-form non-postselected momentum variances, with the angle sum
/// evaluated directly — the `m/2` shortcut for the sum only holds for
/// three or more equidistant meters, not for `m = 1` or the antipodal
/// `m = 2` grid.
pub fn predicted_pi_variances(scenario: &Scenario) -> Vec<f64> {
    let z = scenario.meter_squeezing;
    let ch = scenario.state_squeezing.cosh();
    scenario
        .angles
        .iter()
        .map(|&phi_i| {
            let back_action: f64 = scenario
                .angles
                .iter()
                .map(|&phi_j| (phi_i - phi_j).sin().powi(2) / 8.0)
                .sum();
            1.0 / (2.0 * z) + z * back_action + ch / 2.0
        })
        .collect()
}

/// Meter momentum statistics conditioned on the final two-mode measurement
/// of the system pair, via Gaussian conditioning of the evolved joint
/// state on the scenario's effect.
///
/// The conditioned covariance has the closed form of
/// [`retrodicted_pi_cov_closed_form`]: the meter back-action term of the
/// non-postselected variance disappears entirely, and each diagonal entry
/// is `1/(2z)` plus the single-quadrature retrodiction variance.
pub fn retrodict_meter_stats(scenario: &Scenario) -> Result<MeterStatistics> {
    let l = build_transform(scenario)?;
    let evolved = l.apply(&scenario.initial_state()?).map_err(crate::JointMeasurementError::from)?;
    let conditioned = condition_on_effect(
        &evolved,
        &scenario.system_modes(),
        &scenario.epr_effect()?,
    )?;
    let mut stats = pi_block_meters_only(scenario, &conditioned);
    stats.postselected = true;
    Ok(stats)
}

fn pi_block_meters_only(scenario: &Scenario, meters_op: &GaussianOperator) -> MeterStatistics {
    // After conditioning away the system modes the operator holds only the
    // m meter modes, still interleaved (q_i, pi_i).
    let m = scenario.meters;
    debug_assert_eq!(meters_op.n_modes(), m);
    let pi_mean = DVector::from_iterator(m, (0..m).map(|i| meters_op.mean()[2 * i + 1]));
    let pi_cov = DMatrix::from_fn(m, m, |i, j| meters_op.cov()[(2 * i + 1, 2 * j + 1)]);
    MeterStatistics {
        pi_mean,
        pi_cov,
        postselected: false,
    }
}

/// Closed form of the postselected momentum covariance:
///
/// ```text
/// σ_ii = 1/(2z) + B,   σ_ij = cos(phi_i - phi_j) · B
/// B = (cosh s + cosh s') / (4 (1 + cosh(s - s')))
/// ```
pub fn retrodicted_pi_cov_closed_form(scenario: &Scenario) -> DMatrix<f64> {
    let m = scenario.meters;
    let bracket = squeezed_pair_variance(scenario.state_squeezing, scenario.effect_squeezing);
    let z = scenario.meter_squeezing;
    DMatrix::from_fn(m, m, |i, j| {
        let phase = (scenario.angles[i] - scenario.angles[j]).cos();
        if i == j {
            1.0 / (2.0 * z) + bracket
        } else {
            phase * bracket
        }
    })
}

/// Closed form of the postselected momentum means: each meter's initial
/// momentum displacement plus the retrodicted mean of its quadrature.
pub fn retrodicted_pi_mean_closed_form(scenario: &Scenario) -> DVector<f64> {
    DVector::from_iterator(
        scenario.meters,
        scenario.angles.iter().enumerate().map(|(i, &phi)| {
            scenario.meter_means[2 * i + 1]
                + squeezed_pair_mean(
                    scenario.state_squeezing,
                    scenario.effect_squeezing,
                    &scenario.state_means,
                    &scenario.effect_means,
                    phi,
                )
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use gaussian_core::QuadratureDirection;
    use retrodiction::pqs_two_mode;

    #[test]
    fn single_meter_predicted_variance_adds_half_quantum() {
        for z in [0.5, 1.0, 4.0] {
            let scenario = Scenario::equidistant(1, z, 0.0, 0.0).unwrap();
            let stats = predicted_meter_stats(&scenario).unwrap();
            let expected = 1.0 / (2.0 * z) + 0.5;
            assert_relative_eq!(stats.pi_cov[(0, 0)], expected, epsilon = 1e-13);
            assert_relative_eq!(predicted_pi_variances(&scenario)[0], expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn three_meters_share_the_same_variance() {
        let scenario = Scenario::equidistant(3, 1.0, 0.0, 0.0).unwrap();
        let stats = predicted_meter_stats(&scenario).unwrap();
        let closed = predicted_pi_variances(&scenario);
        for i in 0..3 {
            assert_relative_eq!(stats.pi_cov[(i, i)], 1.1875, epsilon = 1e-13);
            assert_relative_eq!(closed[i], 1.1875, epsilon = 1e-13);
        }
        assert!(!stats.postselected);
    }

    #[test]
    fn meter_squeezing_tradeoff_diverges_at_both_extremes() {
        let at = |z: f64| {
            let scenario = Scenario::equidistant(3, z, 0.0, 0.0).unwrap();
            predicted_pi_variances(&scenario)[0]
        };
        assert!(at(1e-6) > 1e5);
        assert!(at(1e6) > 1e4);
        assert!(at(1.0) < 2.0);
    }

    #[test]
    fn predicted_path_matches_closed_form_off_grid_too() {
        let scenario = Scenario::equidistant(4, 2.0, 1.0, 0.0)
            .unwrap()
            .with_angles(vec![0.2, 0.9, 1.7, 4.0])
            .unwrap();
        let stats = predicted_meter_stats(&scenario).unwrap();
        let closed = predicted_pi_variances(&scenario);
        for i in 0..4 {
            assert_relative_eq!(stats.pi_cov[(i, i)], closed[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn unsqueezed_retrodiction_quarters_plus_meter_noise() {
        for m in 1..=4 {
            let scenario = Scenario::equidistant(m, 1.0, 0.0, 0.0).unwrap();
            let stats = retrodict_meter_stats(&scenario).unwrap();
            assert!(stats.postselected);
            for i in 0..m {
                assert_relative_eq!(stats.pi_cov[(i, i)], 0.75, epsilon = 1e-12);
                for j in (i + 1)..m {
                    let expected = 0.25 * (scenario.angles[i] - scenario.angles[j]).cos();
                    assert_relative_eq!(stats.pi_cov[(i, j)], expected, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn strong_epr_postselection_beats_the_meter_noise_floor() {
        let scenario = Scenario::equidistant(3, 10.0, 2.0, -2.0).unwrap();
        let stats = retrodict_meter_stats(&scenario).unwrap();
        let expected = 1.0 / 20.0 + 1.0 / (4.0 * 2.0_f64.cosh());
        for i in 0..3 {
            assert_relative_eq!(stats.pi_cov[(i, i)], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn conditioning_path_matches_closed_forms_with_random_means() {
        let scenario = Scenario::equidistant(3, 0.7, 1.2, -0.4)
            .unwrap()
            .with_state_means([0.4, -0.7, 0.2, 0.9])
            .unwrap()
            .with_effect_means([-0.3, 0.6, 1.1, -0.8])
            .unwrap()
            .with_meter_means(vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6])
            .unwrap();
        let stats = retrodict_meter_stats(&scenario).unwrap();
        let cov_closed = retrodicted_pi_cov_closed_form(&scenario);
        let mean_closed = retrodicted_pi_mean_closed_form(&scenario);
        for i in 0..3 {
            assert_relative_eq!(stats.pi_mean[i], mean_closed[i], epsilon = 1e-10);
            for j in 0..3 {
                assert_relative_eq!(stats.pi_cov[(i, j)], cov_closed[(i, j)], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn conditioned_mean_decomposes_into_meter_offset_plus_retrodiction() {
        let scenario = Scenario::equidistant(4, 1.3, 0.8, -1.1)
            .unwrap()
            .with_state_means([0.2, 0.5, -0.4, 0.1])
            .unwrap()
            .with_effect_means([0.7, -0.2, 0.3, 0.6])
            .unwrap()
            .with_meter_means(vec![0.0, 0.9, 0.0, -0.3, 0.0, 0.25, 0.0, 0.0])
            .unwrap();
        let stats = retrodict_meter_stats(&scenario).unwrap();
        let rho = gaussian_core::GaussianOperator::state(
            DVector::from_row_slice(&scenario.state_means),
            gaussian_core::GaussianOperator::two_mode_squeezed(scenario.state_squeezing)
                .unwrap()
                .cov()
                .clone(),
        )
        .unwrap();
        let effect = scenario.epr_effect().unwrap();
        for i in 0..4 {
            let single = pqs_two_mode(&rho, &effect, QuadratureDirection::new(0, scenario.angles[i]))
                .unwrap()
                .distribution
                .mean;
            let decomposed = stats.pi_mean[i] - scenario.meter_means[2 * i + 1];
            assert_relative_eq!(decomposed, single, epsilon = 1e-10);
        }
    }

    #[test]
    fn postselection_never_hurts_on_the_opposite_squeezing_family() {
        for &m in &[3, 4, 8] {
            for &z in &[0.5, 1.0, 2.0] {
                for &s in &[0.0, 1.0, 2.0] {
                    let scenario = Scenario::equidistant(m, z, s, -s).unwrap();
                    let pre = predicted_pi_variances(&scenario);
                    let post = retrodict_meter_stats(&scenario).unwrap();
                    for i in 0..m {
                        assert!(
                            post.pi_cov[(i, i)] <= pre[i] + 1e-12,
                            "m={m} z={z} s={s} meter {i}: {} > {}",
                            post.pi_cov[(i, i)],
                            pre[i]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn meter_statistics_serialize_with_row_major_cov() {
        let scenario = Scenario::equidistant(2, 1.0, 0.0, 0.0).unwrap();
        let stats = retrodict_meter_stats(&scenario).unwrap();
        let json = serde_json::to_value(&stats).unwrap();
        assert_eq!(json["postselected"], serde_json::json!(true));
        assert_eq!(json["pi_cov"].as_array().unwrap().len(), 2);
        assert_eq!(stats.cov_entries().count(), 3);
    }
}
