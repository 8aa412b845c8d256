//! The restorer: bicubic upsampling followed by a learned `k × k` filter and a bias.

use crate::error::{Error, Result};
use crate::restoration::image::{correlate, shifted, ImageTensor};
use crate::restoration::resample::upsample;

/// Largest parameter count; finite-difference gradients cost two loss evaluations each.
pub const MAX_PARAMS: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct RestorerParams {
    k: usize,
    /// Row-major `k × k` correlation coefficients.
    pub filter: Vec<f64>,
    pub bias: f64,
}

impl RestorerParams {
    pub fn new(k: usize, filter: Vec<f64>, bias: f64) -> Result<Self> {
        check_size(k)?;
        if filter.len() != k * k {
            return Err(Error::DimensionMismatch { expected: k * k, found: filter.len() });
        }
        if filter.iter().any(|v| !v.is_finite()) || !bias.is_finite() {
            return Err(Error::NonFinite("restorer parameters"));
        }
        Ok(Self { k, filter, bias })
    }

    /// Centre tap 1, everything else 0: the restorer reduces to bicubic upsampling.
    pub fn identity(k: usize) -> Result<Self> {
        check_size(k)?;
        let mut filter = vec![0.0; k * k];
        filter[(k / 2) * k + k / 2] = 1.0;
        Ok(Self { k, filter, bias: 0.0 })
    }

    pub fn filter_size(&self) -> usize {
        self.k
    }

    pub fn param_count(&self) -> usize {
        self.k * self.k + 1
    }

    /// Filter taps followed by the bias.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.filter.clone();
        v.push(self.bias);
        v
    }

    pub fn from_vec(k: usize, v: &[f64]) -> Result<Self> {
        if v.len() != k * k + 1 {
            return Err(Error::DimensionMismatch { expected: k * k + 1, found: v.len() });
        }
        Self::new(k, v[..k * k].to_vec(), v[k * k])
    }
}

pub(crate) fn check_size(k: usize) -> Result<()> {
    if k % 2 == 0 || k * k + 1 > MAX_PARAMS {
        return Err(Error::invalid(format!(
            "filter size must be odd with at most {MAX_PARAMS} parameters, got {k}"
        )));
    }
    Ok(())
}

/// `SR = filter ⋆ bicubic_up(LR) + bias`, reflect padding, no clamping.
pub fn restore(params: &RestorerParams, lr: &ImageTensor, scale: usize) -> Result<ImageTensor> {
    let up = upsample(lr, scale)?;
    let out = correlate(&up, &params.filter, params.k);
    Ok(out.map(|p| p + params.bias))
}

/// The images `SR` is linear in: one shifted copy of the upsampled input per filter tap,
/// then a constant image for the bias. `SR = Σ θ_j B_j`.
pub(crate) fn basis_images(up: &ImageTensor, k: usize) -> Vec<ImageTensor> {
    let half = (k / 2) as isize;
    let mut basis = Vec::with_capacity(k * k + 1);
    for i in 0..k as isize {
        for j in 0..k as isize {
            basis.push(shifted(up, i - half, j - half));
        }
    }
    basis.push(ImageTensor::filled(up.height(), up.width(), 1.0));
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> ImageTensor {
        ImageTensor::new(h, w, (0..h * w).map(|_| rng.random()).collect()).unwrap()
    }

    fn random_params(rng: &mut ChaCha8Rng, k: usize) -> RestorerParams {
        RestorerParams::new(k, (0..k * k).map(|_| rng.random_range(-1.0..1.0)).collect(), 0.0)
            .unwrap()
    }

    #[test]
    fn identity_is_bicubic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lr = random_image(&mut rng, 8, 8);
        let sr = restore(&RestorerParams::identity(5).unwrap(), &lr, 2).unwrap();
        assert_eq!(sr, upsample(&lr, 2).unwrap());
    }

    #[test]
    fn zero_input_gives_bias() {
        let lr = ImageTensor::filled(8, 8, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut p = random_params(&mut rng, 3);
        p.filter.iter_mut().for_each(|v| *v *= 7.5);
        p.bias = 0.125;
        let sr = restore(&p, &lr, 2).unwrap();
        assert!(sr.pixels().iter().all(|v| *v == 0.125));
    }

    #[test]
    fn output_is_linear_in_the_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let lr = random_image(&mut rng, 8, 10);
            let (p1, p2) = (random_params(&mut rng, 5), random_params(&mut rng, 5));
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let mix = RestorerParams::new(
                5,
                p1.filter.iter().zip(&p2.filter).map(|(x, y)| a * x + b * y).collect(),
                0.0,
            )
            .unwrap();
            let s1 = restore(&p1, &lr, 2).unwrap();
            let s2 = restore(&p2, &lr, 2).unwrap();
            let sm = restore(&mix, &lr, 2).unwrap();
            for ((m, x), y) in sm.pixels().iter().zip(s1.pixels()).zip(s2.pixels()) {
                assert!((m - (a * x + b * y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_reconstructs_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lr = random_image(&mut rng, 8, 8);
        let mut p = random_params(&mut rng, 3);
        p.bias = -0.3;
        let basis = basis_images(&upsample(&lr, 2).unwrap(), 3);
        let theta = p.to_vec();
        let sr = restore(&p, &lr, 2).unwrap();
        for (idx, v) in sr.pixels().iter().enumerate() {
            let s: f64 = theta.iter().zip(&basis).map(|(t, b)| t * b.pixels()[idx]).sum();
            assert!((v - s).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_limits() {
        assert!(RestorerParams::identity(4).is_err());
        assert!(RestorerParams::identity(11).is_ok());
        assert!(RestorerParams::identity(13).is_err());
        let p = RestorerParams::identity(3).unwrap();
        assert_eq!(RestorerParams::from_vec(3, &p.to_vec()).unwrap(), p);
    }
}
