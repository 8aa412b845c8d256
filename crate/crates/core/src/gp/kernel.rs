//! Matérn-5/2 covariance with per-dimension (ARD) lengthscales.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpHyperparameters {
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub constant_mean: f64,
}

impl GpHyperparameters {
    pub fn new(
        lengthscales: Vec<f64>,
        signal_variance: f64,
        noise_variance: f64,
        constant_mean: f64,
    ) -> Result<Self> {
        let h = Self { lengthscales, signal_variance, noise_variance, constant_mean };
        h.validate()?;
        Ok(h)
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengthscales.is_empty() {
            return Err(Error::invalid("at least one lengthscale is required"));
        }
        if self.lengthscales.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::invalid(format!(
                "lengthscales must be positive, got {:?}",
                self.lengthscales
            )));
        }
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(Error::invalid(format!(
                "signal variance must be positive, got {}",
                self.signal_variance
            )));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::invalid(format!(
                "noise variance must be non-negative, got {}",
                self.noise_variance
            )));
        }
        if !self.constant_mean.is_finite() {
            return Err(Error::NonFinite("constant mean"));
        }
        Ok(())
    }
}

/// Matérn-5/2 as a function of the scaled distance `r`.
#[inline]
pub(crate) fn matern52_of_r(r: f64, signal_variance: f64) -> f64 {
    let s = SQRT5 * r;
    signal_variance * (1.0 + s + s * s / 3.0) * (-s).exp()
}

#[inline]
pub(crate) fn scaled_distance(x: &[f64], y: &[f64], lengthscales: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(lengthscales)
        .map(|((a, b), l)| {
            let t = (a - b) / l;
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

/// `k(x, x′) = σ² (1 + √5 r + 5r²/3) exp(−√5 r)` with `r² = Σ ((xᵢ − x′ᵢ)/ℓᵢ)²`.
pub fn kernel(x: &[f64], y: &[f64], h: &GpHyperparameters) -> Result<f64> {
    h.validate()?;
    if x.len() != h.dim() || y.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: if x.len() != h.dim() { x.len() } else { y.len() },
        });
    }
    Ok(matern52_of_r(scaled_distance(x, y, &h.lengthscales), h.signal_variance))
}
