//! Single-channel images and the small fixed filters shared by losses and metrics.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A row-major single-channel image. Pixels are nominally in [0, 1] but restored images
/// may leave that range during training, so only finiteness is enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl ImageTensor {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if pixels.len() != height * width {
            return Err(Error::DimensionMismatch { expected: height * width, found: pixels.len() });
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("image pixels"));
        }
        Ok(Self { height, width, pixels })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self { height, width, pixels: vec![value; height * width] }
    }

    pub(crate) fn from_raw(height: usize, width: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), height * width);
        Self { height, width, pixels }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.height == other.height && self.width == other.width
    }

    pub(crate) fn check_shape(&self, other: &Self) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::invalid(format!(
                "image size mismatch: {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.height, self.width, self.pixels.iter().map(|p| f(*p)).collect())
    }

    pub fn clamped(&self) -> Self {
        self.map(|p| p.clamp(0.0, 1.0))
    }

    /// Plain PGM, `P2` (ASCII) or `P5` (binary), with 8-bit levels of the clamped image.
    pub fn to_pgm(&self, binary: bool) -> Vec<u8> {
        let levels: Vec<u8> =
            self.pixels.iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        let mut out = Vec::new();
        let magic = if binary { "P5" } else { "P2" };
        let _ = write!(out, "{magic}\n{} {}\n255\n", self.width, self.height);
        if binary {
            out.extend_from_slice(&levels);
        } else {
            for row in levels.chunks(self.width) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }

    pub fn write_pgm(&self, path: &Path, binary: bool) -> Result<()> {
        std::fs::write(path, self.to_pgm(binary))?;
        Ok(())
    }
}

/// Reflect an index into `0..n` without repeating the edge sample (`-1 → 1`).
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

/// Correlate with an odd `k × k` filter (row-major) using reflect padding.
pub(crate) fn correlate(img: &ImageTensor, filter: &[f64], k: usize) -> ImageTensor {
    let (h, w) = (img.height, img.width);
    let half = (k / 2) as isize;
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for i in 0..k {
                let rr = reflect(r as isize + i as isize - half, h);
                let row = &img.pixels[rr * w..(rr + 1) * w];
                for j in 0..k {
                    let cc = reflect(c as isize + j as isize - half, w);
                    acc += filter[i * k + j] * row[cc];
                }
            }
            out[r * w + c] = acc;
        }
    }
    ImageTensor::from_raw(h, w, out)
}

/// Shift by `(dr, dc)` with reflect padding: output `(r, c)` reads input `(r + dr, c + dc)`.
pub(crate) fn shifted(img: &ImageTensor, dr: isize, dc: isize) -> ImageTensor {
    let (h, w) = (img.height, img.width);
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        let rr = reflect(r as isize + dr, h);
        for c in 0..w {
            out.push(img.pixels[rr * w + reflect(c as isize + dc, w)]);
        }
    }
    ImageTensor::from_raw(h, w, out)
}

pub(crate) const SOBEL_X: [f64; 9] = [-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0];
pub(crate) const SOBEL_Y: [f64; 9] = [-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0];
pub(crate) const LAPLACIAN: [f64; 9] = [0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0];

pub fn sobel_x(img: &ImageTensor) -> ImageTensor {
    correlate(img, &SOBEL_X, 3)
}

pub fn sobel_y(img: &ImageTensor) -> ImageTensor {
    correlate(img, &SOBEL_Y, 3)
}

pub fn laplacian(img: &ImageTensor) -> ImageTensor {
    correlate(img, &LAPLACIAN, 3)
}
