//! Verification oracles that never touch the phase-space algebra they
//! check.
//!
//! Two independent routes validate the Gaussian machinery:
//!
//! * a truncated Fock-space construction of the two-mode squeezed state,
//!   with quadrature marginals evaluated through harmonic-oscillator
//!   wavefunctions (stable Hermite-function recurrence), and
//! * Monte Carlo simulators of the measurement chains — both the deferred
//!   joint-Gaussian sampling of the full meter-bank protocol and a
//!   sequential-collapse sampler for projective-then-final measurement
//!   sequences — whose conditional statistics are estimated by linear
//!   regression and reported with standard errors.
//!
//! Sampling is deterministic: every trial derives its own generator stream
//! from `(seed, trial index)`, so serial and parallel runs agree bitwise.

mod chain;
mod error;
mod fock;
mod hermite;

pub use chain::{
    compare_matrix_stats, sample_trials, simulate_chain, simulate_chain_with_effect,
    simulate_projective_chain, ChainSample, EmpiricalMeterStats, RegressionEstimate,
    StatComparison,
};
pub use error::FockOracleError;
pub use fock::{build_tmss_fock, tmss_coefficients, FockDensityMatrix, TRACE_DEFICIENCY_WARN};
pub use hermite::{default_grid, hermite_functions, quadrature_marginal_fock, reduced_marginal};

pub type Result<T> = std::result::Result<T, FockOracleError>;
