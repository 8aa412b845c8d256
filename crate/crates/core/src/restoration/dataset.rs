//! Procedural training images.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::restoration::image::ImageTensor;
use crate::restoration::resample::downsample;
use crate::stats::mix_seed;

/// A high-resolution image and its bicubic downsample.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePair {
    pub hr: ImageTensor,
    pub lr: ImageTensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<ImagePair>,
    pub validation: Vec<ImagePair>,
    pub scale: usize,
}

/// Number of validation images for a dataset of `count`: the last fifth, at least one.
pub fn validation_count(count: usize) -> usize {
    (count / 5).max(1)
}

/// One HR image: a few sinusoids, step edges and flat rectangles, clamped to [0, 1].
pub fn synthesize_image(rng: &mut impl Rng, size: usize) -> ImageTensor {
    let n = size as f64;
    let mut px = vec![0.5; size * size];

    for _ in 0..3 {
        let amp = rng.random_range(0.05..0.15);
        // Up to a quarter of the sampling rate, so the HR image is band-limited.
        let cycles = rng.random_range(1.0..n / 4.0);
        let theta = rng.random_range(0.0..std::f64::consts::PI);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let (fx, fy) = (cycles * theta.cos() / n, cycles * theta.sin() / n);
        for r in 0..size {
            for c in 0..size {
                let arg = std::f64::consts::TAU * (fx * c as f64 + fy * r as f64) + phase;
                px[r * size + c] += amp * arg.sin();
            }
        }
    }

    for _ in 0..2 {
        let jump = rng.random_range(0.15..0.35) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let (nx, ny) = (theta.cos(), theta.sin());
        let offset = rng.random_range(0.3..0.7) * n;
        let center = n / 2.0;
        for r in 0..size {
            for c in 0..size {
                let d = (c as f64 - center) * nx + (r as f64 - center) * ny + center - offset;
                if d > 0.0 {
                    px[r * size + c] += jump;
                }
            }
        }
    }

    for _ in 0..3 {
        let h = rng.random_range(size / 8..=size / 3).max(1);
        let w = rng.random_range(size / 8..=size / 3).max(1);
        let r0 = rng.random_range(0..=size - h);
        let c0 = rng.random_range(0..=size - w);
        let value = rng.random_range(0.0..1.0);
        let alpha = rng.random_range(0.4..0.9);
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                let p = &mut px[r * size + c];
                *p = (1.0 - alpha) * *p + alpha * value;
            }
        }
    }

    ImageTensor::from_raw(size, size, px.into_iter().map(|p| p.clamp(0.0, 1.0)).collect())
}

/// `count` image pairs; image `i` is drawn from its own stream `mix_seed(seed, i)`. The
/// last `validation_count(count)` images form the validation split.
pub fn synthesize_dataset(seed: u64, count: usize, size: usize, scale: usize) -> Result<Dataset> {
    if count < 2 {
        return Err(Error::invalid("the dataset needs at least 2 images (train and validation)"));
    }
    if scale == 0 || size % scale != 0 {
        return Err(Error::invalid(format!("image size {size} is not divisible by scale {scale}")));
    }
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64));
        let hr = synthesize_image(&mut rng, size);
        let lr = downsample(&hr, scale)?;
        pairs.push(ImagePair { hr, lr });
    }
    let validation = pairs.split_off(count - validation_count(count));
    Ok(Dataset { train: pairs, validation, scale })
}
