use gaussian_core::linalg::symmetrize;
use gaussian_core::{GaussianError, GaussianOperator, OperatorKind, QuadratureDirection};
use joint_measurement::{build_transform, Scenario};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::{FockOracleError, Result};

/// Minimum trial count accepted by the simulators.
pub const MIN_TRIALS: usize = 1_000;

const CHUNK: usize = 8_192;

/// One simulated run of a measurement chain: the recorded outcomes of the
/// intermediate measurements and the outcome vector of the final
/// (conditioning) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSample {
    /// Meter momentum readouts (or the single projective outcome).
    pub outcomes: DVector<f64>,
    /// Outcome vector of the final measurement on the system.
    pub conditioner: DVector<f64>,
}

/// Empirical conditional meter statistics with standard errors.
#[derive(Debug, Clone)]
pub struct EmpiricalMeterStats {
    /// Conditional mean of the meter momenta, evaluated at the scenario's
    /// recorded final-measurement outcome.
    pub pi_mean: DVector<f64>,
    /// Conditional covariance of the meter momenta (regression residual
    /// covariance).
    pub pi_cov: DMatrix<f64>,
    pub mean_stderr: DVector<f64>,
    pub cov_stderr: DMatrix<f64>,
    pub trials: usize,
}

impl Serialize for EmpiricalMeterStats {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use gaussian_core::linalg::matrix_to_rows;
        #[derive(Serialize)]
        struct Repr {
            pi_mean: Vec<f64>,
            pi_cov: Vec<Vec<f64>>,
            mean_stderr: Vec<f64>,
            cov_stderr: Vec<Vec<f64>>,
            trials: usize,
        }
        Repr {
            pi_mean: self.pi_mean.iter().copied().collect(),
            pi_cov: matrix_to_rows(&self.pi_cov),
            mean_stderr: self.mean_stderr.iter().copied().collect(),
            cov_stderr: matrix_to_rows(&self.cov_stderr),
            trials: self.trials,
        }
        .serialize(serializer)
    }
}

/// Empirical conditional distribution of a single retrodicted outcome.
#[derive(Debug, Clone, Serialize)]
pub struct RegressionEstimate {
    pub conditional_mean: f64,
    pub mean_stderr: f64,
    pub conditional_variance: f64,
    pub variance_stderr: f64,
    pub trials: usize,
}

/// One analytic-vs-empirical line of a verification report.
#[derive(Debug, Clone, Serialize)]
pub struct StatComparison {
    pub name: String,
    pub analytic: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub z_score: f64,
}

impl StatComparison {
    pub fn new(name: impl Into<String>, analytic: f64, empirical: f64, stderr: f64) -> Self {
        let z_score = if stderr > 0.0 {
            (empirical - analytic) / stderr
        } else if empirical == analytic {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            name: name.into(),
            analytic,
            empirical,
            stderr,
            z_score,
        }
    }

    pub fn within(&self, n_sigma: f64) -> bool {
        self.z_score.abs() <= n_sigma
    }
}

/// Compare empirical conditional moments against analytic ones entry by
/// entry (means, then the upper covariance triangle).
pub fn compare_matrix_stats(
    analytic_mean: &DVector<f64>,
    analytic_cov: &DMatrix<f64>,
    empirical: &EmpiricalMeterStats,
) -> Vec<StatComparison> {
    let m = analytic_mean.len();
    let mut out = Vec::with_capacity(m + m * (m + 1) / 2);
    for i in 0..m {
        out.push(StatComparison::new(
            format!("pi_mean[{i}]"),
            analytic_mean[i],
            empirical.pi_mean[i],
            empirical.mean_stderr[i],
        ));
    }
    for i in 0..m {
        for j in i..m {
            out.push(StatComparison::new(
                format!("pi_cov[{i}][{j}]"),
                analytic_cov[(i, j)],
                empirical.pi_cov[(i, j)],
                empirical.cov_stderr[(i, j)],
            ));
        }
    }
    out
}

/// Per-trial deterministic generator: stream `trial` of the master seed,
/// so serial and parallel execution draw identical values.
fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn standard_normals(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)))
}

/// Sufficient statistics for the regression of targets on regressors,
/// accumulated over centered samples.
struct Moments {
    n: usize,
    sum_t: DVector<f64>,
    sum_y: DVector<f64>,
    sum_tt: DMatrix<f64>,
    sum_ty: DMatrix<f64>,
    sum_yy: DMatrix<f64>,
}

impl Moments {
    fn new(p: usize, q: usize) -> Self {
        Self {
            n: 0,
            sum_t: DVector::zeros(p),
            sum_y: DVector::zeros(q),
            sum_tt: DMatrix::zeros(p, p),
            sum_ty: DMatrix::zeros(p, q),
            sum_yy: DMatrix::zeros(q, q),
        }
    }

    fn push(&mut self, t: &DVector<f64>, y: &DVector<f64>) {
        self.n += 1;
        self.sum_t += t;
        self.sum_y += y;
        self.sum_tt.ger(1.0, t, t, 1.0);
        self.sum_ty.ger(1.0, t, y, 1.0);
        self.sum_yy.ger(1.0, y, y, 1.0);
    }

    fn merge(mut self, other: Moments) -> Moments {
        self.n += other.n;
        self.sum_t += other.sum_t;
        self.sum_y += other.sum_y;
        self.sum_tt += other.sum_tt;
        self.sum_ty += other.sum_ty;
        self.sum_yy += other.sum_yy;
        self
    }

    /// Conditional moments of the targets given regressors pinned at
    /// `y_star` (all in centered coordinates), with standard errors.
    fn finalize(&self, y_star: &DVector<f64>) -> Result<ConditionalMoments> {
        let n = self.n as f64;
        let q = self.sum_y.len();
        let mean_t = &self.sum_t / n;
        let mean_y = &self.sum_y / n;
        let s_tt = symmetrize(&((&self.sum_tt - n * &mean_t * mean_t.transpose()) / (n - 1.0)));
        let s_ty = (&self.sum_ty - n * &mean_t * mean_y.transpose()) / (n - 1.0);
        let s_yy = symmetrize(&((&self.sum_yy - n * &mean_y * mean_y.transpose()) / (n - 1.0)));

        let chol = nalgebra::Cholesky::new(s_yy.clone()).ok_or_else(|| {
            FockOracleError::InvalidArgument(
                "empirical regressor covariance is not positive definite".into(),
            )
        })?;
        let b = chol.solve(&s_ty.transpose()); // q x p
        let df = n - 1.0 - q as f64;
        let cond_cov = symmetrize(&((&s_tt - &s_ty * &b) * ((n - 1.0) / df)));
        let delta = y_star - &mean_y;
        let cond_mean = &mean_t + b.transpose() * &delta;

        let mahal = chol.solve(&delta).dot(&delta);
        let p = mean_t.len();
        let mean_stderr = DVector::from_iterator(
            p,
            (0..p).map(|i| (cond_cov[(i, i)] / n * (1.0 + mahal)).sqrt()),
        );
        let cov_stderr = DMatrix::from_fn(p, p, |i, j| {
            ((cond_cov[(i, i)] * cond_cov[(j, j)] + cond_cov[(i, j)].powi(2)) / df).sqrt()
        });
        Ok(ConditionalMoments {
            cond_mean,
            cond_cov,
            mean_stderr,
            cov_stderr,
            trials: self.n,
        })
    }
}

struct ConditionalMoments {
    cond_mean: DVector<f64>,
    cond_cov: DMatrix<f64>,
    mean_stderr: DVector<f64>,
    cov_stderr: DMatrix<f64>,
    trials: usize,
}

/// The joint Gaussian of (meter momenta, final-measurement outcomes) for a
/// scenario: deferred-measurement sampling model of the full protocol.
struct DeferredChain {
    mean_pi: DVector<f64>,
    mean_sys: DVector<f64>,
    factor: DMatrix<f64>, // Cholesky factor of the joint covariance
    meters: usize,
}

impl DeferredChain {
    fn build(scenario: &Scenario, effect: &GaussianOperator) -> Result<Self> {
        if effect.n_modes() != 2 || effect.kind() != OperatorKind::Effect {
            return Err(FockOracleError::InvalidArgument(
                "chain conditioner must be a two-mode effect".into(),
            ));
        }
        let l = build_transform(scenario)?;
        let evolved = l
            .apply(&scenario.initial_state()?)
            .map_err(GaussianError::from)
            .map_err(FockOracleError::from)?;
        let m = scenario.meters;
        let pi_idx: Vec<usize> = (0..m).map(|i| scenario.pi_index(i)).collect();
        let sys_idx: Vec<usize> = (2 * m..2 * m + 4).collect();

        let d = m + 4;
        let mut cov = DMatrix::zeros(d, d);
        let mut mean_pi = DVector::zeros(m);
        let mut mean_sys = DVector::zeros(4);
        let all: Vec<usize> = pi_idx.iter().chain(sys_idx.iter()).copied().collect();
        for (a, &ia) in all.iter().enumerate() {
            for (b, &ib) in all.iter().enumerate() {
                cov[(a, b)] = evolved.cov()[(ia, ib)];
            }
        }
        // The final measurement reads the system quadratures through the
        // effect's Gaussian resolution.
        for a in 0..4 {
            for b in 0..4 {
                cov[(m + a, m + b)] += effect.cov()[(a, b)];
            }
        }
        for (a, &ia) in pi_idx.iter().enumerate() {
            mean_pi[a] = evolved.mean()[ia];
        }
        for (a, &ia) in sys_idx.iter().enumerate() {
            mean_sys[a] = evolved.mean()[ia];
        }
        let factor = nalgebra::Cholesky::new(symmetrize(&cov))
            .ok_or_else(|| {
                FockOracleError::InvalidArgument(
                    "joint outcome covariance is not positive definite".into(),
                )
            })?
            .l();
        Ok(Self {
            mean_pi,
            mean_sys,
            factor,
            meters: m,
        })
    }

    /// Centered draw (deviations from the analytic means).
    fn draw_centered(&self, rng: &mut ChaCha8Rng) -> (DVector<f64>, DVector<f64>) {
        let d = self.meters + 4;
        let z = standard_normals(rng, d);
        let w = &self.factor * z;
        (
            w.rows(0, self.meters).into_owned(),
            w.rows(self.meters, 4).into_owned(),
        )
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(FockOracleError::InvalidArgument(format!(
            "at least {MIN_TRIALS} trials required, got {trials}"
        )));
    }
    Ok(())
}

/// Simulate the full meter-bank protocol and estimate the conditional
/// meter statistics given the final measurement outcomes by linear
/// regression.
///
/// All outcome observables commute after the interaction, so the chain is
/// sampled from their exact joint Gaussian (deferring every readout to the
/// end); the conditioning measurement contributes its effect covariance as
/// readout noise on the system quadratures. The regression is evaluated at
/// the scenario's recorded `effect_means`, making the result directly
/// comparable to the analytic postselected statistics.
pub fn simulate_chain(scenario: &Scenario, trials: usize, seed: u64) -> Result<EmpiricalMeterStats> {
    simulate_chain_with_effect(scenario, &scenario.epr_effect()?, trials, seed)
}

/// [`simulate_chain`] with an explicit conditioning effect, e.g. an almost
/// uninformative one to recover the non-postselected statistics.
pub fn simulate_chain_with_effect(
    scenario: &Scenario,
    effect: &GaussianOperator,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalMeterStats> {
    check_trials(trials)?;
    let chain = DeferredChain::build(scenario, effect)?;
    let m = scenario.meters;

    let moments = accumulate_parallel(trials, seed, || Moments::new(m, 4), |acc, rng| {
        let (t, y) = chain.draw_centered(rng);
        acc.push(&t, &y);
    });

    // Regression target point in centered coordinates.
    let y_star = effect.mean() - &chain.mean_sys;
    let cm = moments.finalize(&y_star)?;
    Ok(EmpiricalMeterStats {
        pi_mean: cm.cond_mean + &chain.mean_pi,
        pi_cov: cm.cond_cov,
        mean_stderr: cm.mean_stderr,
        cov_stderr: cm.cov_stderr,
        trials: cm.trials,
    })
}

/// A few raw chain draws for inspection and determinism tests.
pub fn sample_trials(scenario: &Scenario, count: usize, seed: u64) -> Result<Vec<ChainSample>> {
    let effect = scenario.epr_effect()?;
    let chain = DeferredChain::build(scenario, &effect)?;
    Ok((0..count)
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let (dt, dy) = chain.draw_centered(&mut rng);
            ChainSample {
                outcomes: dt + &chain.mean_pi,
                conditioner: dy + &chain.mean_sys,
            }
        })
        .collect())
}

/// Sequential-collapse oracle for a projective-then-final measurement
/// sequence on an n-mode Gaussian pair.
///
/// Per trial: draw the regularized projective outcome `x` of `x_phi` from
/// the state's smeared marginal; apply the measurement back-action (the
/// conjugate quadrature is convolved with the regularizer's reciprocal
/// variance before the measured one is conditioned); draw the final
/// measurement outcome from the post-measurement state through the
/// effect's resolution; regress `x` on the final outcomes.
///
/// The conditional mean is evaluated at the effect's recorded mean vector,
/// so the result estimates the same retrodicted distribution as the
/// analytic product-of-marginals formulas.
pub fn simulate_projective_chain(
    rho: &GaussianOperator,
    effect: &GaussianOperator,
    dir: QuadratureDirection,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<RegressionEstimate> {
    check_trials(trials)?;
    if rho.kind() != OperatorKind::State || effect.kind() != OperatorKind::Effect {
        return Err(FockOracleError::InvalidArgument(
            "expected (state, effect) pair".into(),
        ));
    }
    if rho.n_modes() != effect.n_modes() {
        return Err(FockOracleError::InvalidArgument(
            "state and effect must share the mode count".into(),
        ));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(FockOracleError::InvalidArgument(format!(
            "projective regularizer must be positive and finite, got {eps}"
        )));
    }
    let dim = 2 * rho.n_modes();
    if dir.mode >= rho.n_modes() {
        return Err(FockOracleError::InvalidArgument(format!(
            "direction mode {} out of range",
            dir.mode
        )));
    }

    let [c, s] = dir.unit();
    let mut u = DVector::zeros(dim);
    u[2 * dir.mode] = c;
    u[2 * dir.mode + 1] = s;
    let mut v = DVector::zeros(dim);
    v[2 * dir.mode] = -s;
    v[2 * dir.mode + 1] = c;

    // Back-action: convolve the conjugate, then condition the measured
    // quadrature on the smeared outcome (Kalman form, no explicit inverse).
    let sigma_c = rho.cov() + (1.0 / (4.0 * eps)) * &v * v.transpose();
    let gain = &sigma_c * &u;
    let denom = eps + u.dot(&gain);
    let post_cov = symmetrize(&(&sigma_c - &gain * gain.transpose() / denom));
    let marginal_mean = u.dot(rho.mean());
    let outcome_sd = (u.dot(&(rho.cov() * &u)) + eps).sqrt();

    let read_cov = &post_cov + effect.cov();
    let factor = nalgebra::Cholesky::new(symmetrize(&read_cov))
        .ok_or_else(|| {
            FockOracleError::InvalidArgument(
                "post-measurement readout covariance is not positive definite".into(),
            )
        })?
        .l();

    let rho_mean = rho.mean().clone();
    let gain_over_denom = &gain / denom;

    let moments = accumulate_parallel(trials, seed, || Moments::new(1, dim), |acc, rng| {
        let z: f64 = StandardNormal.sample(rng);
        let x_dev = outcome_sd * z; // outcome deviation from the marginal mean
        let noise = standard_normals(rng, dim);
        // Centered final outcome: E[y] = r̄_ρ, so the deviation is the
        // back-action shift plus readout noise.
        let y_dev = &gain_over_denom * x_dev + &factor * noise;
        acc.push(&DVector::from_vec(vec![x_dev]), &y_dev);
    });

    let y_star = effect.mean() - &rho_mean;
    let cm = moments.finalize(&y_star)?;
    Ok(RegressionEstimate {
        conditional_mean: cm.cond_mean[0] + marginal_mean,
        mean_stderr: cm.mean_stderr[0],
        conditional_variance: cm.cond_cov[(0, 0)],
        variance_stderr: cm.cov_stderr[(0, 0)],
        trials: cm.trials,
    })
}

/// Run `trials` independent draws in deterministic chunks: every trial has
/// its own generator stream, chunk partials are merged in index order, so
/// the result does not depend on the thread count.
fn accumulate_parallel<F>(
    trials: usize,
    seed: u64,
    make: impl Fn() -> Moments + Sync,
    body: F,
) -> Moments
where
    F: Fn(&mut Moments, &mut ChaCha8Rng) + Sync,
{
    let chunk_count = trials.div_ceil(CHUNK);
    let partials: Vec<Moments> = (0..chunk_count)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = make();
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(trials);
            for trial in start..end {
                let mut rng = trial_rng(seed, trial);
                body(&mut acc, &mut rng);
            }
            acc
        })
        .collect();
    partials
        .into_iter()
        .reduce(Moments::merge)
        .expect("at least one chunk")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trial_streams_are_deterministic_and_distinct() {
        let a = standard_normals(&mut trial_rng(7, 0), 4);
        let b = standard_normals(&mut trial_rng(7, 0), 4);
        let c = standard_normals(&mut trial_rng(7, 1), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn too_few_trials_rejected() {
        let scenario = Scenario::equidistant(1, 1.0, 0.0, 0.0).unwrap();
        assert!(simulate_chain(&scenario, 10, 1).is_err());
    }

    #[test]
    fn samples_are_finite_and_reproducible() {
        let scenario = Scenario::equidistant(2, 1.0, 1.0, -1.0).unwrap();
        let a = sample_trials(&scenario, 32, 99).unwrap();
        let b = sample_trials(&scenario, 32, 99).unwrap();
        assert_eq!(a, b);
        for s in &a {
            assert!(s.outcomes.iter().all(|v| v.is_finite()));
            assert!(s.conditioner.iter().all(|v| v.is_finite()));
            assert_eq!(s.outcomes.len(), 2);
            assert_eq!(s.conditioner.len(), 4);
        }
    }

    #[test]
    fn comparison_report_flags_large_deviations() {
        let good = StatComparison::new("x", 1.0, 1.001, 0.01);
        assert!(good.within(3.0));
        let bad = StatComparison::new("x", 1.0, 2.0, 0.01);
        assert!(!bad.within(3.0));
    }

    // A cheap smoke check of the full pipeline; the statistically tight
    // comparisons live in the integration tests with 10^6 trials.
    #[test]
    fn small_chain_lands_near_the_analytic_value() {
        let scenario = Scenario::equidistant(2, 1.0, 0.0, 0.0).unwrap();
        let stats = simulate_chain(&scenario, 20_000, 5).unwrap();
        assert_relative_eq!(stats.pi_cov[(0, 0)], 0.75, max_relative = 0.05);
        assert_eq!(stats.trials, 20_000);
    }
}
