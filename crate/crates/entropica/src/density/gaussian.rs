//! Exact Gaussians, used for matched comparisons without discretization error.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean/variance pair describing an exact Gaussian distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    mean: f64,
    variance: f64,
}

impl GaussianSpec {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian requires finite mean and variance > 0, got ({mean}, {variance})"
            )));
        }
        Ok(GaussianSpec { mean, variance })
    }

    pub fn standard() -> Self {
        GaussianSpec {
            mean: 0.0,
            variance: 1.0,
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std_dev();
        (-0.5 * z * z).exp() / (self.std_dev() * (2.0 * PI).sqrt())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / (self.std_dev() * std::f64::consts::SQRT_2);
        0.5 * (1.0 + libm::erf(z))
    }

    /// Differential entropy in nats: ½ log(2πe σ²).
    pub fn entropy(&self) -> f64 {
        0.5 * (2.0 * PI * std::f64::consts::E * self.variance).ln()
    }

    pub fn entropy_power(&self) -> f64 {
        (2.0 * self.entropy()).exp()
    }
}
