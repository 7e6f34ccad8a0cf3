//! Phase-space toolkit for Gaussian quantum states and measurement effects.
//!
//! Everything here works on the first and second moments of bosonic modes:
//! a [`GaussianOperator`] is a mean vector plus covariance matrix (ħ = 1,
//! vacuum variance 1/2), tagged as either a state or a measurement effect.
//! On top of that the crate provides
//!
//! * rotated quadrature variances and marginals along arbitrary phase-space
//!   directions,
//! * linear (symplectic) phase-space maps with explicit coordinate layouts
//!   and the permutations between them,
//! * Gaussian conditioning: the state of a subsystem after a Gaussian
//!   measurement on the complement, via a Schur complement on the summed
//!   covariances,
//! * admissibility diagnostics (symplectic spectra, positivity).
//!
//! Quadratures are ordered `x1, p1, x2, p2, ...` throughout; blocked layouts
//! are handled by explicit permutations (see [`VectorLayout`]).

mod condition;
mod direction;
mod error;
mod layout;
mod map;
mod operator;
mod symplectic;
mod validate;

pub mod linalg;

pub use condition::condition_on_effect;
pub use direction::{QuadratureDirection, ScalarGaussian};
pub use error::GaussianError;
pub use layout::VectorLayout;
pub use map::{LinearPhaseSpaceMap, SYMPLECTIC_TOL};
pub use operator::{GaussianOperator, OperatorKind, DEFAULT_PROJECTIVE_EPS};
pub use symplectic::{symplectic_eigenvalues, SymplecticForm};
pub use validate::ValidationReport;

/// Vacuum quadrature variance with ħ = 1.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Result alias used by all fallible operations in this crate.
pub type Result<T> = std::result::Result<T, GaussianError>;
