use serde::{Deserialize, Serialize};

/// A quadrature observable `x_phi = x cos(phi) + p sin(phi)` of one mode.
///
/// `phi = 0` is position, `phi = pi/2` is momentum. The direction at
/// `phi + pi` denotes the negated observable `-x_phi`; both index the same
/// measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureDirection {
    /// 0-based mode index.
    pub mode: usize,
    /// Angle in radians.
    pub phi: f64,
}

impl QuadratureDirection {
    pub fn new(mode: usize, phi: f64) -> Self {
        Self { mode, phi }
    }

    /// Unit vector `(cos phi, sin phi)` in the mode's (x, p) plane.
    pub fn unit(&self) -> [f64; 2] {
        [self.phi.cos(), self.phi.sin()]
    }

    /// Direction of the conjugate observable `x_{phi + pi/2}`.
    pub fn conjugate(&self) -> Self {
        Self {
            mode: self.mode,
            phi: self.phi + std::f64::consts::FRAC_PI_2,
        }
    }
}

/// A one-dimensional Gaussian outcome distribution `N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarGaussian {
    pub mean: f64,
    pub variance: f64,
}

impl ScalarGaussian {
    pub fn new(mean: f64, variance: f64) -> Self {
        debug_assert!(variance > 0.0, "variance must be positive");
        Self { mean, variance }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Probability density at `x`.
    pub fn density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std_dev();
        (-0.5 * z * z).exp() / (self.std_dev() * (2.0 * std::f64::consts::PI).sqrt())
    }
}
