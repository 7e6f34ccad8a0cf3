use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{matrix_to_rows, rows_to_matrix, symmetrize, symmetry_defect};
use crate::{GaussianError, QuadratureDirection, Result, ScalarGaussian, VACUUM_VARIANCE};

/// Relative asymmetry tolerated in a covariance matrix at construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default regularizer for projective homodyne effects: the measured
/// direction gets variance eps, the conjugate direction 1/eps. The sharp
/// projector is the eps -> 0 limit; keeping eps finite keeps every formula
/// finite, and convergence in eps is covered by tests.
pub const DEFAULT_PROJECTIVE_EPS: f64 = 1e-8;

/// Whether a Gaussian operator plays the role of a density matrix or of a
/// measurement effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    State,
    Effect,
}

/// Mean vector and covariance matrix of a Gaussian state or effect on `n`
/// modes, in interleaved `(x1, p1, x2, p2, ...)` ordering with ħ = 1.
///
/// Effects are stored unnormalized: only their first and second moments
/// matter once outcome probabilities are normalized, so scalar prefactors
/// are dropped.
///
/// Construction checks structure (dimensions, finiteness, symmetry, and
/// positive definiteness for effects) but does not reject states that
/// violate the Heisenberg bound; [`GaussianOperator::validate`] reports
/// admissibility without mutating anything.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianOperator {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    kind: OperatorKind,
}

impl GaussianOperator {
    /// Build a Gaussian state from its moments.
    pub fn state(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        Self::new(mean, cov, OperatorKind::State)
    }

    /// Build a Gaussian effect from its moments. The covariance must be
    /// positive definite.
    pub fn effect(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        Self::new(mean, cov, OperatorKind::Effect)
    }

    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, kind: OperatorKind) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(GaussianError::InvalidArgument(format!(
                "mean length must be a positive even number, got {dim}"
            )));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(GaussianError::InvalidArgument(format!(
                "covariance is {}x{} but the mean has length {dim}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) || cov.iter().any(|v| !v.is_finite()) {
            return Err(GaussianError::InvalidArgument(
                "moments must be finite".into(),
            ));
        }
        if symmetry_defect(&cov) > SYMMETRY_TOL {
            return Err(GaussianError::InvalidArgument(format!(
                "covariance asymmetry {:.3e} exceeds tolerance {SYMMETRY_TOL:.0e}",
                symmetry_defect(&cov)
            )));
        }
        let cov = symmetrize(&cov);
        if kind == OperatorKind::Effect && nalgebra::Cholesky::new(cov.clone()).is_none() {
            return Err(GaussianError::InvalidArgument(
                "effect covariance must be positive definite".into(),
            ));
        }
        Ok(Self {
            n_modes: dim / 2,
            mean,
            cov,
            kind,
        })
    }

    /// The vacuum (coherent state at the origin) on `n_modes` modes:
    /// zero mean, covariance Identity/2.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(GaussianError::InvalidArgument(
                "vacuum needs at least one mode".into(),
            ));
        }
        let dim = 2 * n_modes;
        Self::state(
            DVector::zeros(dim),
            DMatrix::identity(dim, dim) * VACUUM_VARIANCE,
        )
    }

    /// Single-mode coherent state centered at `(x, p)`.
    pub fn coherent_state(x: f64, p: f64) -> Result<Self> {
        Self::state(
            DVector::from_vec(vec![x, p]),
            DMatrix::identity(2, 2) * VACUUM_VARIANCE,
        )
    }

    /// Single-mode coherent (heterodyne-style) effect centered at `(x, p)`.
    pub fn coherent_effect(x: f64, p: f64) -> Result<Self> {
        Self::effect(
            DVector::from_vec(vec![x, p]),
            DMatrix::identity(2, 2) * VACUUM_VARIANCE,
        )
    }

    /// Two-mode squeezed state with squeezing parameter `s`: zero mean and
    /// covariance
    ///
    /// ```text
    ///        [ cosh s      0      sinh s      0    ]
    ///  1/2 * [   0      cosh s      0      -sinh s ]
    ///        [ sinh s      0      cosh s      0    ]
    ///        [   0     -sinh s      0      cosh s  ]
    /// ```
    ///
    /// in `(x1, p1, x2, p2)` ordering. For `s > 0` the combinations
    /// `x1 - x2` and `p1 + p2` are squeezed to variance `e^{-s}`.
    pub fn two_mode_squeezed(s: f64) -> Result<Self> {
        Ok(Self {
            n_modes: 2,
            mean: DVector::zeros(4),
            cov: two_mode_squeezed_cov(s)?,
            kind: OperatorKind::State,
        })
    }

    /// Two-mode effect of the same squeezed form as
    /// [`GaussianOperator::two_mode_squeezed`], with a displacement set by
    /// the recorded outcome.
    ///
    /// With `s < 0` this squeezes `x1 + x2` and `p1 - p2` (variance
    /// `e^{s}`), the effect left behind by a joint measurement of those two
    /// commuting observables; the outcome values only displace the effect,
    /// never change its squeezing.
    pub fn two_mode_squeezed_effect(s: f64, mean: DVector<f64>) -> Result<Self> {
        if mean.len() != 4 {
            return Err(GaussianError::InvalidArgument(format!(
                "two-mode effect mean must have length 4, got {}",
                mean.len()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(GaussianError::InvalidArgument(
                "moments must be finite".into(),
            ));
        }
        Ok(Self {
            n_modes: 2,
            mean,
            cov: two_mode_squeezed_cov(s)?,
            kind: OperatorKind::Effect,
        })
    }

    /// Regularized projective homodyne effect for outcome `outcome` of the
    /// quadrature `x_phi`: variance `eps` along the measured direction,
    /// `1/eps` along the conjugate (see [`DEFAULT_PROJECTIVE_EPS`]).
    pub fn homodyne_effect(dir: QuadratureDirection, outcome: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(GaussianError::InvalidArgument(format!(
                "projective regularizer must be positive and finite, got {eps}"
            )));
        }
        if !dir.phi.is_finite() || !outcome.is_finite() {
            return Err(GaussianError::InvalidArgument(
                "direction and outcome must be finite".into(),
            ));
        }
        let [c, s] = dir.unit();
        let u = DVector::from_vec(vec![c, s]);
        let v = DVector::from_vec(vec![-s, c]);
        let cov = eps * &u * u.transpose() + (1.0 / eps) * &v * v.transpose();
        Ok(Self {
            n_modes: 1,
            mean: outcome * u,
            cov: symmetrize(&cov),
            kind: OperatorKind::Effect,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// 2x2 covariance block of one mode.
    pub fn mode_cov(&self, mode: usize) -> Result<DMatrix<f64>> {
        self.check_mode(mode)?;
        Ok(self.cov.view((2 * mode, 2 * mode), (2, 2)).into_owned())
    }

    /// `(x, p)` mean of one mode.
    pub fn mode_mean(&self, mode: usize) -> Result<[f64; 2]> {
        self.check_mode(mode)?;
        Ok([self.mean[2 * mode], self.mean[2 * mode + 1]])
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(GaussianError::InvalidArgument(format!(
                "mode {mode} out of range for {} modes",
                self.n_modes
            )));
        }
        Ok(())
    }

    /// Variance of the quadrature `x_phi` of `dir.mode`: the quadratic form
    /// `uᵀ σ u` with `u = (cos phi, sin phi)` over that mode's 2x2 block,
    /// i.e. `σ_x cos²(phi) + 2 σ_xp cos(phi) sin(phi) + σ_p sin²(phi)`.
    ///
    /// The cross term carries the `+` sign of the quadratic form for the
    /// direction vector of `x_phi`; the sign is immaterial for diagonal
    /// covariance blocks.
    pub fn rotated_variance(&self, dir: QuadratureDirection) -> Result<f64> {
        if !dir.phi.is_finite() {
            return Err(GaussianError::InvalidArgument(
                "direction angle must be finite".into(),
            ));
        }
        let block = self.mode_cov(dir.mode)?;
        let [c, s] = dir.unit();
        Ok(block[(0, 0)] * c * c + 2.0 * block[(0, 1)] * c * s + block[(1, 1)] * s * s)
    }

    /// Marginal outcome distribution of `x_phi` on `dir.mode`.
    pub fn marginal(&self, dir: QuadratureDirection) -> Result<ScalarGaussian> {
        let variance = self.rotated_variance(dir)?;
        let [mx, mp] = self.mode_mean(dir.mode)?;
        let [c, s] = dir.unit();
        Ok(ScalarGaussian::new(c * mx + s * mp, variance))
    }

    pub(crate) fn from_parts(
        mean: DVector<f64>,
        cov: DMatrix<f64>,
        kind: OperatorKind,
    ) -> Self {
        debug_assert_eq!(mean.len() % 2, 0);
        debug_assert_eq!(cov.nrows(), mean.len());
        Self {
            n_modes: mean.len() / 2,
            mean,
            cov,
            kind,
        }
    }
}

fn two_mode_squeezed_cov(s: f64) -> Result<DMatrix<f64>> {
    if !s.is_finite() {
        return Err(GaussianError::InvalidArgument(format!(
            "squeezing parameter must be finite, got {s}"
        )));
    }
    let ch = 0.5 * s.cosh();
    let sh = 0.5 * s.sinh();
    Ok(DMatrix::from_row_slice(
        4,
        4,
        &[
            ch, 0.0, sh, 0.0, //
            0.0, ch, 0.0, -sh, //
            sh, 0.0, ch, 0.0, //
            0.0, -sh, 0.0, ch,
        ],
    ))
}

/// JSON interchange form: `{n_modes, kind, mean: [...], cov: [[...]]}` with
/// row-major covariance rows.
#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    n_modes: usize,
    kind: OperatorKind,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl Serialize for GaussianOperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorRepr {
            n_modes: self.n_modes,
            kind: self.kind,
            mean: self.mean.iter().copied().collect(),
            cov: matrix_to_rows(&self.cov),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GaussianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(deserializer)?;
        if repr.mean.len() != 2 * repr.n_modes {
            return Err(serde::de::Error::custom(format!(
                "mean length {} does not match n_modes {}",
                repr.mean.len(),
                repr.n_modes
            )));
        }
        let cov = rows_to_matrix(&repr.cov).map_err(serde::de::Error::custom)?;
        GaussianOperator::new(DVector::from_vec(repr.mean), cov, repr.kind)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::symplectic_eigenvalues;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_moments() {
        let v = GaussianOperator::vacuum(1).unwrap();
        assert_eq!(v.mean().as_slice(), &[0.0, 0.0]);
        assert_eq!(v.cov(), &DMatrix::from_diagonal(&nalgebra::dvector![0.5, 0.5]));

        let v2 = GaussianOperator::vacuum(2).unwrap();
        assert_eq!(v2.cov(), &(DMatrix::<f64>::identity(4, 4) * 0.5));
        for nu in symplectic_eigenvalues(v2.cov()).unwrap() {
            assert_relative_eq!(nu, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn vacuum_rejects_zero_modes() {
        assert!(matches!(
            GaussianOperator::vacuum(0),
            Err(GaussianError::InvalidArgument(_))
        ));
    }

    #[test]
    fn two_mode_squeezed_entries_at_unit_squeezing() {
        let op = GaussianOperator::two_mode_squeezed(1.0).unwrap();
        assert_relative_eq!(op.cov()[(0, 0)], 1.0_f64.cosh() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(op.cov()[(0, 2)], 1.0_f64.sinh() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(op.cov()[(1, 3)], -(1.0_f64.sinh()) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn two_mode_squeezed_at_zero_is_vacuum() {
        let op = GaussianOperator::two_mode_squeezed(0.0).unwrap();
        assert_eq!(op.cov(), GaussianOperator::vacuum(2).unwrap().cov());
    }

    #[test]
    fn epr_difference_quadrature_is_squeezed() {
        // Var((x1 - x2)/sqrt(2)) = e^{-2s}/2... for the standard form it is
        // (cosh s - sinh s)/2 = e^{-s}/2; at s = 2 that is ~0.0677.
        let op = GaussianOperator::two_mode_squeezed(2.0).unwrap();
        let w = DVector::from_vec(vec![1.0, 0.0, -1.0, 0.0]) / 2.0_f64.sqrt();
        let var = (w.transpose() * op.cov() * &w)[(0, 0)];
        assert_relative_eq!(var, (-2.0_f64).exp() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn rotated_variance_vacuum_is_isotropic() {
        let v = GaussianOperator::vacuum(1).unwrap();
        for k in 0..16 {
            let phi = k as f64 * std::f64::consts::PI / 8.0;
            let var = v.rotated_variance(QuadratureDirection::new(0, phi)).unwrap();
            assert_relative_eq!(var, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn rotated_variance_squeezed_axes() {
        let cov = DMatrix::from_diagonal(&nalgebra::dvector![2.5, 0.1]);
        let op = GaussianOperator::state(DVector::zeros(2), cov).unwrap();
        let at = |phi: f64| op.rotated_variance(QuadratureDirection::new(0, phi)).unwrap();
        assert_relative_eq!(at(0.0), 2.5, epsilon = 1e-15);
        assert_relative_eq!(at(std::f64::consts::FRAC_PI_2), 0.1, epsilon = 1e-15);
        assert_relative_eq!(at(std::f64::consts::FRAC_PI_4), 1.3, epsilon = 1e-15);
    }

    #[test]
    fn rotated_variance_out_of_range_mode() {
        let v = GaussianOperator::vacuum(1).unwrap();
        assert!(v.rotated_variance(QuadratureDirection::new(1, 0.0)).is_err());
    }

    #[test]
    fn marginal_shifts_with_displacement() {
        let op = GaussianOperator::coherent_state(3.0, -1.0).unwrap();
        let m = op.marginal(QuadratureDirection::new(0, 0.0)).unwrap();
        assert_relative_eq!(m.mean, 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.variance, 0.5, epsilon = 1e-15);

        let m = op.marginal(QuadratureDirection::new(0, std::f64::consts::FRAC_PI_2)).unwrap();
        assert_relative_eq!(m.mean, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn tmss_single_mode_marginal_is_thermal() {
        let op = GaussianOperator::two_mode_squeezed(1.0).unwrap();
        for k in 0..8 {
            let phi = k as f64 * std::f64::consts::PI / 4.0;
            let m = op.marginal(QuadratureDirection::new(0, phi)).unwrap();
            assert_relative_eq!(m.mean, 0.0, epsilon = 1e-15);
            assert_relative_eq!(m.variance, 1.0_f64.cosh() / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn homodyne_effect_moments() {
        let dir = QuadratureDirection::new(0, 0.3);
        let e = GaussianOperator::homodyne_effect(dir, 1.7, 1e-6).unwrap();
        // Recovering the sharp variance from the dense matrix cancels
        // entries of order 1/eps, so the achievable accuracy is relative.
        assert_relative_eq!(e.rotated_variance(dir).unwrap(), 1e-6, max_relative = 1e-4);
        assert_relative_eq!(
            e.rotated_variance(dir.conjugate()).unwrap(),
            1e6,
            max_relative = 1e-9
        );
        let m = e.marginal(dir).unwrap();
        assert_relative_eq!(m.mean, 1.7, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_covariance_rejected() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.1, 1.0]);
        assert!(GaussianOperator::state(DVector::zeros(2), cov).is_err());
    }

    #[test]
    fn effect_requires_positive_definite() {
        let cov = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -0.5]);
        assert!(GaussianOperator::effect(DVector::zeros(2), cov).is_err());
    }

    #[test]
    fn json_round_trip() {
        let op = GaussianOperator::two_mode_squeezed(0.7).unwrap();
        let text = serde_json::to_string(&op).unwrap();
        let back: GaussianOperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, op);
        assert!(text.contains("\"kind\":\"state\""));
    }

    #[test]
    fn json_rejects_inconsistent_mode_count() {
        let text = r#"{"n_modes": 2, "kind": "state", "mean": [0.0, 0.0], "cov": [[0.5, 0.0], [0.0, 0.5]]}"#;
        assert!(serde_json::from_str::<GaussianOperator>(text).is_err());
    }
}
