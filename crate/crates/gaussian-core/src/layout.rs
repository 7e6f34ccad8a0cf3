use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{GaussianError, Result};

/// Coordinate layout of a stacked phase-space vector.
///
/// The canonical layout everywhere in this workspace is `Interleaved`:
/// `(x1, p1, x2, p2, ...)`. Meter-bank transformations are more naturally
/// written with the meter positions and momenta grouped,
/// `(q1..qk, pi1..pik, x_{k+1}, p_{k+1}, ...)`; that is `BlockedPrefix`
/// with `modes = k`. Silent mixups between the two conventions are the
/// dominant bug class in this domain, so the permutation between them is
/// explicit and tested rather than implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorLayout {
    /// `(x1, p1, x2, p2, ...)`.
    Interleaved,
    /// First `modes` modes grouped by quadrature (all positions, then all
    /// momenta), remaining modes interleaved.
    BlockedPrefix { modes: usize },
}

impl VectorLayout {
    /// Fully blocked layout `(x1..xn, p1..pn)` on `n` modes.
    pub fn blocked(n_modes: usize) -> Self {
        VectorLayout::BlockedPrefix { modes: n_modes }
    }

    /// Index map from this layout into the interleaved layout:
    /// `v_layout[k] = v_interleaved[map[k]]`.
    pub fn index_map(&self, n_modes: usize) -> Result<Vec<usize>> {
        match *self {
            VectorLayout::Interleaved => Ok((0..2 * n_modes).collect()),
            VectorLayout::BlockedPrefix { modes } => {
                if modes > n_modes {
                    return Err(GaussianError::InvalidArgument(format!(
                        "blocked prefix of {modes} modes exceeds total {n_modes}"
                    )));
                }
                let mut map = Vec::with_capacity(2 * n_modes);
                map.extend((0..modes).map(|j| 2 * j)); // positions
                map.extend((0..modes).map(|j| 2 * j + 1)); // momenta
                map.extend(2 * modes..2 * n_modes); // untouched tail
                Ok(map)
            }
        }
    }

    /// Permutation matrix `P` with `v_layout = P v_interleaved`.
    ///
    /// `P` is orthogonal, so `v_interleaved = Pᵀ v_layout` and a matrix `L`
    /// expressed in this layout acts on interleaved coordinates as
    /// `Pᵀ L P`.
    pub fn permutation(&self, n_modes: usize) -> Result<DMatrix<f64>> {
        let map = self.index_map(n_modes)?;
        let dim = 2 * n_modes;
        let mut p = DMatrix::zeros(dim, dim);
        for (row, &col) in map.iter().enumerate() {
            p[(row, col)] = 1.0;
        }
        Ok(p)
    }
}
