//! Joint measurement of `m` non-commuting quadratures via a meter bank.
//!
//! One mode of an entangled two-mode system is coupled impulsively to `m`
//! ancillary oscillators ("meters"), one per quadrature direction; reading
//! out the meter momenta then realizes a simultaneous measurement of all
//! `m` directions. This crate builds the phase-space transformation of that
//! interaction, computes the meter statistics with and without
//! postselection on a final joint measurement of the entangled pair, and
//! recombines the meter outcomes into the minimum-variance estimate of any
//! single target quadrature.
//!
//! Without postselection each meter pays the usual back-action price: its
//! variance carries a term from the anti-squeezed quadratures of every
//! other meter. Conditioning on the final entangled measurement removes
//! that term entirely, leaving `1/(2z)` plus the single-quadrature
//! retrodiction variance — which has no lower bound.

mod error;
mod scenario;
mod stats;
mod transform;
mod weights;

pub use error::JointMeasurementError;
pub use scenario::Scenario;
pub use stats::{
    predicted_meter_stats, predicted_pi_variances, retrodict_meter_stats,
    retrodicted_pi_cov_closed_form, retrodicted_pi_mean_closed_form, MeterStatistics,
};
pub use transform::{build_transform, CommutatorMatrix};
pub use weights::{
    equidistant_combination_variance, min_variance_weights, optimal_combination_variance,
    optimal_weights, optimal_weights_for_angle,
};

pub type Result<T> = std::result::Result<T, JointMeasurementError>;
