//! Training losses. Every loss is a mean over pixels so weights are comparable across
//! image sizes.
//!
//! The FFT loss uses the unnormalised forward transform `X[u,v] = Σ x[r,c]·e^{−2πi(ur/H +
//! vc/W)}` and averages `|ΔRe| + |ΔIm|` over all `H·W` frequencies.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::restoration::image::{sobel_x, sobel_y, ImageTensor};
use crate::restoration::metrics::ssim;
use crate::restoration::resample::downsample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    L1,
    L2,
    Fft,
    Gradient,
    Cycle,
    Ssim,
}

impl LossKind {
    pub const ALL: [LossKind; 6] =
        [Self::L1, Self::L2, Self::Fft, Self::Gradient, Self::Cycle, Self::Ssim];

    pub fn name(self) -> &'static str {
        match self {
            Self::L1 => "l1",
            Self::L2 => "l2",
            Self::Fft => "fft",
            Self::Gradient => "gradient",
            Self::Cycle => "cycle",
            Self::Ssim => "ssim",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| {
            Error::invalid(format!(
                "unknown loss '{name}' (expected one of l1, l2, fft, gradient, cycle, ssim)"
            ))
        })
    }

    /// Whether the trainer differentiates this loss analytically.
    pub fn has_analytic_gradient(self) -> bool {
        matches!(self, Self::L1 | Self::L2 | Self::Gradient | Self::Cycle)
    }
}

pub(crate) fn mean_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Cached row and column plans for one image size.
#[derive(Clone)]
pub(crate) struct Fft2d {
    h: usize,
    w: usize,
    row: Arc<dyn Fft<f64>>,
    col: Arc<dyn Fft<f64>>,
}

impl Fft2d {
    pub(crate) fn new(h: usize, w: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { h, w, row: planner.plan_fft_forward(w), col: planner.plan_fft_forward(h) }
    }

    pub(crate) fn forward(&self, px: &[f64]) -> Vec<Complex<f64>> {
        let (h, w) = (self.h, self.w);
        let mut data: Vec<Complex<f64>> = px.iter().map(|v| Complex::new(*v, 0.0)).collect();
        self.row.process(&mut data);
        let mut column = vec![Complex::new(0.0, 0.0); h];
        for c in 0..w {
            for r in 0..h {
                column[r] = data[r * w + c];
            }
            self.col.process(&mut column);
            for r in 0..h {
                data[r * w + c] = column[r];
            }
        }
        data
    }
}

pub(crate) fn spectrum_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.re - y.re).abs() + (x.im - y.im).abs()).sum::<f64>()
        / a.len() as f64
}

/// Value of one loss. `lr` is only read by the cycle loss.
pub fn loss_value(
    kind: LossKind,
    sr: &ImageTensor,
    hr: &ImageTensor,
    lr: &ImageTensor,
    scale: usize,
) -> Result<f64> {
    sr.check_shape(hr)?;
    Ok(match kind {
        LossKind::L1 => mean_abs_diff(sr.pixels(), hr.pixels()),
        LossKind::L2 => {
            sr.pixels().iter().zip(hr.pixels()).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                / sr.pixels().len() as f64
        }
        LossKind::Fft => {
            let f = Fft2d::new(sr.height(), sr.width());
            spectrum_distance(&f.forward(sr.pixels()), &f.forward(hr.pixels()))
        }
        LossKind::Gradient => {
            mean_abs_diff(sobel_x(sr).pixels(), sobel_x(hr).pixels())
                + mean_abs_diff(sobel_y(sr).pixels(), sobel_y(hr).pixels())
        }
        LossKind::Cycle => {
            let down = downsample(sr, scale)?;
            down.check_shape(lr)?;
            mean_abs_diff(down.pixels(), lr.pixels())
        }
        LossKind::Ssim => 1.0 - ssim(sr, hr)?,
    })
}

/// `Σ ω_i L_i`.
pub fn combined_loss(
    weights: &[f64],
    kinds: &[LossKind],
    sr: &ImageTensor,
    hr: &ImageTensor,
    lr: &ImageTensor,
    scale: usize,
) -> Result<f64> {
    if weights.len() != kinds.len() {
        return Err(Error::DimensionMismatch { expected: kinds.len(), found: weights.len() });
    }
    let mut total = 0.0;
    for (w, k) in weights.iter().zip(kinds) {
        total += w * loss_value(*k, sr, hr, lr, scale)?;
    }
    Ok(total)
}
