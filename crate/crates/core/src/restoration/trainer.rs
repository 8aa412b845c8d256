//! Gradient descent on the weighted loss.
//!
//! The restored image is linear in the parameters, `SR = Σ θ_j B_j`, so each training pair
//! keeps its basis images `B_j` together with their Sobel responses, downsamples and
//! spectra. l1, l2, gradient and cycle losses are differentiated analytically (the
//! sub-gradient of `|·|` at 0 is 0). fft and ssim use central differences with step
//! [`FD_STEP`]; the fft loss perturbs the spectrum directly since the transform is linear.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::restoration::dataset::ImagePair;
use crate::restoration::image::{sobel_x, sobel_y, ImageTensor};
use crate::restoration::loss::{mean_abs_diff, spectrum_distance, Fft2d, LossKind};
use crate::restoration::metrics::ssim;
use crate::restoration::resample::{downsample, upsample};
use crate::restoration::restorer::{basis_images, check_size, RestorerParams};
use crate::stats::pairwise_sum;

pub const FD_STEP: f64 = 1e-5;

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn combine(theta: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; basis[0].len()];
    for (t, b) in theta.iter().zip(basis) {
        if *t != 0.0 {
            for (o, v) in out.iter_mut().zip(b) {
                *o += t * v;
            }
        }
    }
    out
}

fn combine_complex(theta: &[f64], basis: &[Vec<Complex<f64>>]) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); basis[0].len()];
    for (t, b) in theta.iter().zip(basis) {
        if *t != 0.0 {
            for (o, v) in out.iter_mut().zip(b) {
                *o += v * *t;
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-pair data needed to evaluate and differentiate the enabled losses.
struct Prepared {
    h: usize,
    w: usize,
    hr: ImageTensor,
    lr: Vec<f64>,
    basis: Vec<Vec<f64>>,
    sobel: Option<SobelData>,
    down: Option<Vec<Vec<f64>>>,
    spectrum: Option<SpectrumData>,
}

struct SobelData {
    hr_x: Vec<f64>,
    hr_y: Vec<f64>,
    basis_x: Vec<Vec<f64>>,
    basis_y: Vec<Vec<f64>>,
}

struct SpectrumData {
    hr: Vec<Complex<f64>>,
    basis: Vec<Vec<Complex<f64>>>,
}

/// The training objective for a fixed training set and set of enabled losses.
pub struct Trainer {
    kinds: Vec<LossKind>,
    k: usize,
    scale: usize,
    samples: Vec<Prepared>,
}

impl Trainer {
    pub fn new(kinds: &[LossKind], train: &[ImagePair], filter_size: usize, scale: usize) -> Result<Self> {
        check_size(filter_size)?;
        if train.is_empty() {
            return Err(Error::Empty("training set"));
        }
        let want = |k: LossKind| kinds.contains(&k);
        let mut samples = Vec::with_capacity(train.len());
        for pair in train {
            let up = upsample(&pair.lr, scale)?;
            up.check_shape(&pair.hr)?;
            let basis_img = basis_images(&up, filter_size);
            let sobel = want(LossKind::Gradient).then(|| SobelData {
                hr_x: sobel_x(&pair.hr).into_pixels(),
                hr_y: sobel_y(&pair.hr).into_pixels(),
                basis_x: basis_img.iter().map(|b| sobel_x(b).into_pixels()).collect(),
                basis_y: basis_img.iter().map(|b| sobel_y(b).into_pixels()).collect(),
            });
            let down = if want(LossKind::Cycle) {
                Some(
                    basis_img
                        .iter()
                        .map(|b| downsample(b, scale).map(ImageTensor::into_pixels))
                        .collect::<Result<Vec<_>>>()?,
                )
            } else {
                None
            };
            let spectrum = want(LossKind::Fft).then(|| {
                let f = Fft2d::new(up.height(), up.width());
                SpectrumData {
                    hr: f.forward(pair.hr.pixels()),
                    basis: basis_img.iter().map(|b| f.forward(b.pixels())).collect(),
                }
            });
            samples.push(Prepared {
                h: up.height(),
                w: up.width(),
                hr: pair.hr.clone(),
                lr: pair.lr.pixels().to_vec(),
                basis: basis_img.into_iter().map(ImageTensor::into_pixels).collect(),
                sobel,
                down,
                spectrum,
            });
        }
        Ok(Self { kinds: kinds.to_vec(), k: filter_size, scale, samples })
    }

    pub fn kinds(&self) -> &[LossKind] {
        &self.kinds
    }

    pub fn filter_size(&self) -> usize {
        self.k
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    fn check_params(&self, params: &RestorerParams) -> Result<Vec<f64>> {
        if params.filter_size() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, found: params.filter_size() });
        }
        Ok(params.to_vec())
    }

    fn check_weights(&self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.kinds.len() {
            return Err(Error::DimensionMismatch { expected: self.kinds.len(), found: weights.len() });
        }
        Ok(())
    }

    fn term_value(&self, s: &Prepared, kind: LossKind, theta: &[f64], sr: &[f64]) -> Result<f64> {
        Ok(match kind {
            LossKind::L1 => mean_abs_diff(sr, s.hr.pixels()),
            LossKind::L2 => {
                sr.iter().zip(s.hr.pixels()).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                    / sr.len() as f64
            }
            LossKind::Gradient => {
                let d = s.sobel.as_ref().ok_or(Error::invalid("gradient loss not prepared"))?;
                mean_abs_diff(&combine(theta, &d.basis_x), &d.hr_x)
                    + mean_abs_diff(&combine(theta, &d.basis_y), &d.hr_y)
            }
            LossKind::Cycle => {
                let d = s.down.as_ref().ok_or(Error::invalid("cycle loss not prepared"))?;
                mean_abs_diff(&combine(theta, d), &s.lr)
            }
            LossKind::Fft => {
                let d = s.spectrum.as_ref().ok_or(Error::invalid("fft loss not prepared"))?;
                spectrum_distance(&combine_complex(theta, &d.basis), &d.hr)
            }
            LossKind::Ssim => {
                1.0 - ssim(&ImageTensor::from_raw(s.h, s.w, sr.to_vec()), &s.hr)?
            }
        })
    }

    fn term_gradient(&self, s: &Prepared, kind: LossKind, theta: &[f64], sr: &[f64]) -> Result<Vec<f64>> {
        let n = sr.len() as f64;
        Ok(match kind {
            LossKind::L1 => {
                let g: Vec<f64> = sr.iter().zip(s.hr.pixels()).map(|(a, b)| sign(a - b)).collect();
                s.basis.iter().map(|b| dot(&g, b) / n).collect()
            }
            LossKind::L2 => {
                let g: Vec<f64> = sr.iter().zip(s.hr.pixels()).map(|(a, b)| 2.0 * (a - b)).collect();
                s.basis.iter().map(|b| dot(&g, b) / n).collect()
            }
            LossKind::Gradient => {
                let d = s.sobel.as_ref().ok_or(Error::invalid("gradient loss not prepared"))?;
                let gx: Vec<f64> =
                    combine(theta, &d.basis_x).iter().zip(&d.hr_x).map(|(a, b)| sign(a - b)).collect();
                let gy: Vec<f64> =
                    combine(theta, &d.basis_y).iter().zip(&d.hr_y).map(|(a, b)| sign(a - b)).collect();
                d.basis_x
                    .iter()
                    .zip(&d.basis_y)
                    .map(|(bx, by)| (dot(&gx, bx) + dot(&gy, by)) / n)
                    .collect()
            }
            LossKind::Cycle => {
                let d = s.down.as_ref().ok_or(Error::invalid("cycle loss not prepared"))?;
                let g: Vec<f64> = combine(theta, d).iter().zip(&s.lr).map(|(a, b)| sign(a - b)).collect();
                let m = s.lr.len() as f64;
                d.iter().map(|b| dot(&g, b) / m).collect()
            }
            LossKind::Fft => {
                let d = s.spectrum.as_ref().ok_or(Error::invalid("fft loss not prepared"))?;
                let spectrum = combine_complex(theta, &d.basis);
                d.basis
                    .iter()
                    .map(|b| {
                        let plus: Vec<_> = spectrum.iter().zip(b).map(|(x, y)| x + y * FD_STEP).collect();
                        let minus: Vec<_> = spectrum.iter().zip(b).map(|(x, y)| x - y * FD_STEP).collect();
                        (spectrum_distance(&plus, &d.hr) - spectrum_distance(&minus, &d.hr))
                            / (2.0 * FD_STEP)
                    })
                    .collect()
            }
            LossKind::Ssim => s
                .basis
                .iter()
                .map(|b| {
                    let plus: Vec<f64> = sr.iter().zip(b).map(|(x, y)| x + FD_STEP * y).collect();
                    let minus: Vec<f64> = sr.iter().zip(b).map(|(x, y)| x - FD_STEP * y).collect();
                    let sp = ssim(&ImageTensor::from_raw(s.h, s.w, plus), &s.hr)?;
                    let sm = ssim(&ImageTensor::from_raw(s.h, s.w, minus), &s.hr)?;
                    Ok((sm - sp) / (2.0 * FD_STEP))
                })
                .collect::<Result<_>>()?,
        })
    }

    /// Each enabled loss averaged over the training set.
    pub fn loss_terms(&self, params: &RestorerParams) -> Result<Vec<f64>> {
        let theta = self.check_params(params)?;
        let mut per_kind = vec![Vec::with_capacity(self.samples.len()); self.kinds.len()];
        for s in &self.samples {
            let sr = combine(&theta, &s.basis);
            for (i, kind) in self.kinds.iter().enumerate() {
                per_kind[i].push(self.term_value(s, *kind, &theta, &sr)?);
            }
        }
        Ok(per_kind.iter().map(|v| pairwise_sum(v) / v.len() as f64).collect())
    }

    /// `Σ ω_i L_i` averaged over the training set.
    pub fn loss(&self, params: &RestorerParams, weights: &[f64]) -> Result<f64> {
        self.check_weights(weights)?;
        Ok(self.loss_terms(params)?.iter().zip(weights).map(|(l, w)| l * w).sum())
    }

    /// Gradient of enabled loss `index` with respect to filter taps then bias.
    pub fn loss_gradient(&self, index: usize, params: &RestorerParams) -> Result<Vec<f64>> {
        if index >= self.kinds.len() {
            return Err(Error::invalid(format!("no enabled loss at index {index}")));
        }
        let mut w = vec![0.0; self.kinds.len()];
        w[index] = 1.0;
        self.gradient(params, &w)
    }

    /// `Σ ω_i ∇L_i`; losses with zero weight are skipped.
    pub fn gradient(&self, params: &RestorerParams, weights: &[f64]) -> Result<Vec<f64>> {
        self.check_weights(weights)?;
        let theta = self.check_params(params)?;
        let p = theta.len();
        let mut total = vec![0.0; p];
        for s in &self.samples {
            let sr = combine(&theta, &s.basis);
            for (kind, w) in self.kinds.iter().zip(weights) {
                if *w == 0.0 {
                    continue;
                }
                let g = self.term_gradient(s, *kind, &theta, &sr)?;
                for (t, gi) in total.iter_mut().zip(&g) {
                    *t += w * gi;
                }
            }
        }
        let n = self.samples.len() as f64;
        Ok(total.into_iter().map(|g| g / n).collect())
    }

    /// `steps` gradient-descent updates with the gradient norm clipped to `grad_clip`.
    pub fn train_epoch(
        &self,
        params: &RestorerParams,
        weights: &[f64],
        learning_rate: f64,
        steps: usize,
        grad_clip: f64,
    ) -> Result<RestorerParams> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be positive, got {learning_rate}")));
        }
        if !(grad_clip > 0.0) {
            return Err(Error::invalid(format!("gradient clip must be positive, got {grad_clip}")));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("loss weights"));
        }
        let mut theta = self.check_params(params)?;
        for step in 0..steps {
            let current = RestorerParams::from_vec(self.k, &theta)?;
            let mut g = self.gradient(&current, weights)?;
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() {
                let loss = self.loss(&current, weights).unwrap_or(f64::NAN);
                return Err(Error::Training(format!(
                    "non-finite gradient at step {step} (loss {loss}, weights {weights:?})"
                )));
            }
            if norm > grad_clip {
                g.iter_mut().for_each(|v| *v *= grad_clip / norm);
            }
            for (t, gi) in theta.iter_mut().zip(&g) {
                *t -= learning_rate * gi;
            }
        }
        let out = RestorerParams::from_vec(self.k, &theta)
            .map_err(|e| Error::Training(format!("parameters diverged: {e}")))?;
        let loss = self.loss(&out, weights)?;
        if !loss.is_finite() {
            return Err(Error::Training(format!("non-finite loss {loss} with weights {weights:?}")));
        }
        Ok(out)
    }
}
