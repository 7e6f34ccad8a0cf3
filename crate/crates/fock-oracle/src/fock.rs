use nalgebra::{Complex, DMatrix};

use crate::{FockOracleError, Result};

/// Trace deficiency above which a truncation is considered too coarse.
pub const TRACE_DEFICIENCY_WARN: f64 = 0.01;

/// A two-mode density matrix on the truncated number basis
/// `{|j, k> : j, k < cutoff}`, stored dense with index `j * cutoff + k`.
#[derive(Debug, Clone)]
pub struct FockDensityMatrix {
    cutoff: usize,
    data: DMatrix<Complex<f64>>,
    trace_deficiency: f64,
}

impl FockDensityMatrix {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn data(&self) -> &DMatrix<Complex<f64>> {
        &self.data
    }

    /// Probability weight lost to the truncation: `1 - Tr(ρ)`.
    pub fn trace_deficiency(&self) -> f64 {
        self.trace_deficiency
    }

    /// Whether the truncation loses more than [`TRACE_DEFICIENCY_WARN`] of
    /// the trace. Advisory, not fatal.
    pub fn cutoff_too_small(&self) -> bool {
        self.trace_deficiency > TRACE_DEFICIENCY_WARN
    }

    /// Partial trace over the other mode: the reduced single-mode density
    /// matrix of `mode` (0 or 1).
    pub fn reduced_mode(&self, mode: usize) -> Result<DMatrix<Complex<f64>>> {
        if mode > 1 {
            return Err(FockOracleError::InvalidArgument(format!(
                "mode {mode} out of range for a two-mode state"
            )));
        }
        let n = self.cutoff;
        let mut reduced = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let mut acc = Complex::new(0.0, 0.0);
                for t in 0..n {
                    let (row, col) = if mode == 0 {
                        (j * n + t, k * n + t)
                    } else {
                        (t * n + j, t * n + k)
                    };
                    acc += self.data[(row, col)];
                }
                reduced[(j, k)] = acc;
            }
        }
        Ok(reduced)
    }

    /// Mean photon number of one mode, from the reduced diagonal.
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        let reduced = self.reduced_mode(mode)?;
        Ok((0..self.cutoff).map(|j| j as f64 * reduced[(j, j)].re).sum())
    }
}

/// Number-basis coefficients of the two-mode squeezed state
/// `Σ_j c_j |j, j>` truncated below `cutoff`:
/// `c_j = tanh(s/2)^j / cosh(s/2)`.
pub fn tmss_coefficients(s: f64, cutoff: usize) -> Vec<f64> {
    let t = (s / 2.0).tanh();
    let norm = 1.0 / (s / 2.0).cosh();
    let mut coeffs = Vec::with_capacity(cutoff);
    let mut c = norm;
    for _ in 0..cutoff {
        coeffs.push(c);
        c *= t;
    }
    coeffs
}

/// Truncated Fock-space density matrix of the two-mode squeezed state with
/// squeezing parameter `s`.
///
/// The state is pure within the kept subspace; the trace deficiency
/// `1 - Σ_{j<cutoff} c_j²` (equal to `tanh(s/2)^{2 cutoff}`) measures the
/// truncated geometric tail and is reported, not rounded away.
pub fn build_tmss_fock(s: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    if cutoff == 0 {
        return Err(FockOracleError::InvalidArgument(
            "cutoff must be at least 1".into(),
        ));
    }
    if !s.is_finite() {
        return Err(FockOracleError::InvalidArgument(format!(
            "squeezing parameter must be finite, got {s}"
        )));
    }
    let coeffs = tmss_coefficients(s, cutoff);
    let kept: f64 = coeffs.iter().map(|c| c * c).sum();
    let n = cutoff;
    let mut data = DMatrix::zeros(n * n, n * n);
    for (j, &cj) in coeffs.iter().enumerate() {
        for (k, &ck) in coeffs.iter().enumerate() {
            data[(j * n + j, k * n + k)] = Complex::new(cj * ck, 0.0);
        }
    }
    Ok(FockDensityMatrix {
        cutoff,
        data,
        trace_deficiency: 1.0 - kept,
    })
}
