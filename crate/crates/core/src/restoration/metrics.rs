//! Image quality metrics on the unit range.

use serde::{Deserialize, Serialize};

use crate::engine::Orientation;
use crate::error::{Error, Result};
use crate::restoration::dataset::ImagePair;
use crate::restoration::image::{laplacian, ImageTensor};
use crate::restoration::loss::mean_abs_diff;
use crate::restoration::resample::downsample;
use crate::restoration::restorer::{restore, RestorerParams};
use crate::stats::pairwise_sum;

pub const DEFAULT_PSNR_CAP: f64 = 100.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Psnr,
    Ssim,
    LrPsnr,
    HfProxy,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [Self::Psnr, Self::Ssim, Self::LrPsnr, Self::HfProxy];

    pub fn name(self) -> &'static str {
        match self {
            Self::Psnr => "psnr",
            Self::Ssim => "ssim",
            Self::LrPsnr => "lr_psnr",
            Self::HfProxy => "hf_proxy",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| {
            Error::invalid(format!(
                "unknown metric '{name}' (expected one of psnr, ssim, lr_psnr, hf_proxy)"
            ))
        })
    }

    /// The direction in which the metric improves.
    pub fn natural_orientation(self) -> Orientation {
        match self {
            Self::HfProxy => Orientation::Minimize,
            _ => Orientation::Maximize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub psnr_db: f64,
    pub ssim: f64,
    pub lr_psnr_db: f64,
    /// Mean absolute difference of Laplacian responses; lower is better.
    pub hf_proxy: f64,
}

impl MetricVector {
    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::Psnr => self.psnr_db,
            MetricKind::Ssim => self.ssim,
            MetricKind::LrPsnr => self.lr_psnr_db,
            MetricKind::HfProxy => self.hf_proxy,
        }
    }
}

/// `10·log10(1 / MSE)`, capped at `cap` (identical images give the cap).
pub fn psnr(a: &ImageTensor, b: &ImageTensor, cap: f64) -> Result<f64> {
    a.check_shape(b)?;
    let mse = a.pixels().iter().zip(b.pixels()).map(|(x, y)| (x - y).powi(2)).sum::<f64>()
        / a.pixels().len() as f64;
    if mse == 0.0 {
        return Ok(cap);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(cap))
}

/// Normalised 1-D Gaussian of odd length `n`.
pub(crate) fn gaussian_window(n: usize, sigma: f64) -> Vec<f64> {
    let c = (n / 2) as f64;
    let g: Vec<f64> = (0..n).map(|i| (-(i as f64 - c).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Window length for an image: 11, shrunk to the largest odd size that fits.
pub(crate) fn ssim_window_len(h: usize, w: usize) -> usize {
    let n = SSIM_WINDOW.min(h).min(w);
    if n % 2 == 0 {
        n - 1
    } else {
        n
    }
}

/// Separable Gaussian filter over the valid region only.
fn filter_valid(px: &[f64], h: usize, w: usize, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let (ho, wo) = (h - n + 1, w - n + 1);
    let mut tmp = vec![0.0; h * wo];
    for r in 0..h {
        let row = &px[r * w..(r + 1) * w];
        for c in 0..wo {
            tmp[r * wo + c] = g.iter().zip(&row[c..c + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ho * wo];
    for r in 0..ho {
        for (i, gi) in g.iter().enumerate() {
            let src = &tmp[(r + i) * wo..(r + i + 1) * wo];
            for (o, s) in out[r * wo..(r + 1) * wo].iter_mut().zip(src) {
                *o += gi * s;
            }
        }
    }
    out
}

/// Mean SSIM over all fully contained Gaussian windows.
pub fn ssim(a: &ImageTensor, b: &ImageTensor) -> Result<f64> {
    a.check_shape(b)?;
    let (h, w) = (a.height(), a.width());
    let g = gaussian_window(ssim_window_len(h, w), SSIM_SIGMA);
    let (x, y) = (a.pixels(), b.pixels());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
    let mx = filter_valid(x, h, w, &g);
    let my = filter_valid(y, h, w, &g);
    let sxx = filter_valid(&xx, h, w, &g);
    let syy = filter_valid(&yy, h, w, &g);
    let sxy = filter_valid(&xy, h, w, &g);
    let vals: Vec<f64> = (0..mx.len())
        .map(|i| {
            let (ma, mb) = (mx[i], my[i]);
            let va = sxx[i] - ma * ma;
            let vb = syy[i] - mb * mb;
            let cov = sxy[i] - ma * mb;
            ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2))
        })
        .collect();
    Ok(pairwise_sum(&vals) / vals.len() as f64)
}

/// Mean absolute difference of 3×3 Laplacian responses.
pub fn hf_proxy(sr: &ImageTensor, hr: &ImageTensor) -> Result<f64> {
    sr.check_shape(hr)?;
    Ok(mean_abs_diff(laplacian(sr).pixels(), laplacian(hr).pixels()))
}

/// Metrics of one restored image (clamped to [0, 1] first).
pub fn image_metrics(
    sr: &ImageTensor,
    pair: &ImagePair,
    scale: usize,
    cap: f64,
) -> Result<MetricVector> {
    let sr = sr.clamped();
    let down = downsample(&sr, scale)?;
    Ok(MetricVector {
        psnr_db: psnr(&sr, &pair.hr, cap)?,
        ssim: ssim(&sr, &pair.hr)?,
        lr_psnr_db: psnr(&down, &pair.lr, cap)?,
        hf_proxy: hf_proxy(&sr, &pair.hr)?,
    })
}

/// Restore every validation image and average each metric over images.
pub fn evaluate_metrics(
    params: &RestorerParams,
    validation: &[ImagePair],
    scale: usize,
    cap: f64,
) -> Result<MetricVector> {
    if validation.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    let per: Vec<MetricVector> = validation
        .iter()
        .map(|p| image_metrics(&restore(params, &p.lr, scale)?, p, scale, cap))
        .collect::<Result<_>>()?;
    let avg = |f: fn(&MetricVector) -> f64| {
        pairwise_sum(&per.iter().map(f).collect::<Vec<_>>()) / per.len() as f64
    };
    Ok(MetricVector {
        psnr_db: avg(|m| m.psnr_db),
        ssim: avg(|m| m.ssim),
        lr_psnr_db: avg(|m| m.lr_psnr_db),
        hf_proxy: avg(|m| m.hf_proxy),
    })
}
