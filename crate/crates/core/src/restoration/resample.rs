//! Separable bicubic resampling (Keys kernel, a = −0.5).
//!
//! Output sample `i` (0-based) maps to input coordinate `(i + 0.5) / s − 0.5` for scale
//! factor `s`. When shrinking, the kernel is stretched by `1/s` to antialias. Taps that
//! fall outside the image are clamped to the nearest edge sample and weights are
//! normalised to sum to one, so constants are preserved exactly up to rounding.

use crate::error::{Error, Result};
use crate::restoration::image::ImageTensor;

/// Keys cubic convolution kernel with `a = −0.5`.
pub fn cubic(x: f64) -> f64 {
    let a = -0.5;
    let x = x.abs();
    if x <= 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

/// Sparse 1-D resampling operator: `taps[i]` lists `(input index, weight)` for output `i`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Axis {
    pub(crate) n_in: usize,
    pub(crate) taps: Vec<Vec<(usize, f64)>>,
}

impl Axis {
    pub(crate) fn new(n_in: usize, n_out: usize) -> Self {
        let s = n_out as f64 / n_in as f64;
        let (kscale, width) = if s < 1.0 { (s, 4.0 / s) } else { (1.0, 4.0) };
        let taps = (0..n_out)
            .map(|i| {
                let u = (i as f64 + 0.5) / s - 0.5;
                let left = (u - width / 2.0).floor() as isize;
                let count = width.ceil() as isize + 2;
                let mut taps: Vec<(usize, f64)> = Vec::new();
                for j in left..left + count {
                    let w = kscale * cubic(kscale * (u - j as f64));
                    if w == 0.0 {
                        continue;
                    }
                    let idx = j.clamp(0, n_in as isize - 1) as usize;
                    match taps.iter_mut().find(|(k, _)| *k == idx) {
                        Some(t) => t.1 += w,
                        None => taps.push((idx, w)),
                    }
                }
                let total: f64 = taps.iter().map(|t| t.1).sum();
                for t in &mut taps {
                    t.1 /= total;
                }
                taps
            })
            .collect();
        Self { n_in, taps }
    }

    fn n_out(&self) -> usize {
        self.taps.len()
    }
}

/// Separable operator for a fixed input and output size.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Resampler {
    rows: Axis,
    cols: Axis,
}

impl Resampler {
    pub(crate) fn new(h_in: usize, w_in: usize, h_out: usize, w_out: usize) -> Self {
        Self { rows: Axis::new(h_in, h_out), cols: Axis::new(w_in, w_out) }
    }

    pub(crate) fn apply(&self, img: &ImageTensor) -> ImageTensor {
        let (h, w) = (img.height(), img.width());
        debug_assert_eq!((h, w), (self.rows.n_in, self.cols.n_in));
        let px = img.pixels();
        let w_out = self.cols.n_out();
        let mut tmp = vec![0.0; h * w_out];
        for r in 0..h {
            let row = &px[r * w..(r + 1) * w];
            for (c, taps) in self.cols.taps.iter().enumerate() {
                tmp[r * w_out + c] = taps.iter().map(|(k, wt)| wt * row[*k]).sum();
            }
        }
        let h_out = self.rows.n_out();
        let mut out = vec![0.0; h_out * w_out];
        for (r, taps) in self.rows.taps.iter().enumerate() {
            for (k, wt) in taps {
                let src = &tmp[k * w_out..(k + 1) * w_out];
                for (o, s) in out[r * w_out..(r + 1) * w_out].iter_mut().zip(src) {
                    *o += wt * s;
                }
            }
        }
        ImageTensor::from_raw(h_out, w_out, out)
    }
}

pub fn resize(img: &ImageTensor, height: usize, width: usize) -> Result<ImageTensor> {
    if height == 0 || width == 0 {
        return Err(Error::invalid("resize target must be non-empty"));
    }
    Ok(Resampler::new(img.height(), img.width(), height, width).apply(img))
}

pub fn upsample(img: &ImageTensor, scale: usize) -> Result<ImageTensor> {
    if scale == 0 {
        return Err(Error::invalid("scale must be positive"));
    }
    resize(img, img.height() * scale, img.width() * scale)
}

pub fn downsample(img: &ImageTensor, scale: usize) -> Result<ImageTensor> {
    if scale == 0 || img.height() % scale != 0 || img.width() % scale != 0 {
        return Err(Error::invalid(format!(
            "{}x{} image is not divisible by scale {scale}",
            img.height(),
            img.width()
        )));
    }
    resize(img, img.height() / scale, img.width() / scale)
}
