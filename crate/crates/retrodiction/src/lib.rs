//! Past-quantum-state retrodiction for Gaussian systems.
//!
//! Given a prepared state ρ and a later measurement record summarized by a
//! Gaussian effect E, the probability of the outcome of an *intermediate*,
//! unrecorded quadrature measurement is proportional to the product of the
//! two marginals of ρ and E along the measured direction. That conditional
//! distribution — sharper than either marginal alone — is what this crate
//! computes:
//!
//! * single-mode projective retrodiction (variance and full distribution),
//! * two-mode retrodiction where entanglement with an ancilla makes the
//!   retrodicted variance independent of the quadrature angle,
//! * heterodyne retrodiction from the product of two Husimi functions,
//! * polar "butterfly" sweeps of the retrodicted variance over angle.
//!
//! The product of the retrodicted x and p variances can fall far below the
//! Heisenberg bound of 1/4: the bound constrains predictions about future
//! measurements, not hindsight.

mod heterodyne;
mod pair;
mod single;
mod two_mode;

pub use heterodyne::{heterodyne_retrodiction, HeterodyneRetrodiction};
pub use pair::{PqsPair, Provenance, RetrodictionResult};
pub use single::{butterfly_curve, pqs_distribution_single, pqs_variance_single};
pub use two_mode::{pqs_two_mode, squeezed_pair_mean, squeezed_pair_variance};

pub use gaussian_core::GaussianError;

pub type Result<T> = std::result::Result<T, GaussianError>;
