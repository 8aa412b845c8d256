//! Gaussian-process regression surrogates, one per objective.
//!
//! Inputs are expected on the unit cube and targets standardised (see [`Standardizer`]).
//! The model uses a Matérn-5/2 ARD kernel and a constant mean. Hyperparameters are chosen
//! by maximising the log marginal likelihood with a multi-start bounded pattern search in
//! log space; the constant mean is profiled out by generalised least squares at every
//! candidate.

mod kernel;

pub use kernel::{kernel, GpHyperparameters};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optim::PatternSearch;
use kernel::{matern52_of_r, scaled_distance};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

pub const LENGTHSCALE_BOUNDS: (f64, f64) = (1e-2, 10.0);
pub const SIGNAL_VARIANCE_BOUNDS: (f64, f64) = (1e-3, 1e3);
pub const NOISE_VARIANCE_BOUNDS: (f64, f64) = (1e-6, 1.0);

/// Noise floor applied when conditioning, and the first jitter tried on failure.
pub const JITTER_FLOOR: f64 = 1e-6;
pub const JITTER_MAX: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorPrediction {
    pub mean: f64,
    pub variance: f64,
}

impl PosteriorPrediction {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub starts: usize,
    pub max_evals_per_start: usize,
    pub seed: u64,
    /// First jitter added when the Cholesky factorization fails; multiplied by 10 up to
    /// [`JITTER_MAX`].
    pub jitter_start: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { starts: 5, max_evals_per_start: 300, seed: 0, jitter_start: JITTER_FLOOR }
    }
}

/// A conditioned GP posterior.
#[derive(Debug, Clone)]
pub struct GpModel {
    hyper: GpHyperparameters,
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    factor: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter: f64,
}

impl GpModel {
    /// Condition on data with fixed hyperparameters. The noise variance is raised to
    /// [`JITTER_FLOOR`] if below it, and jitter is escalated if factorization fails.
    pub fn condition(
        inputs: Vec<Vec<f64>>,
        targets: Vec<f64>,
        hyper: GpHyperparameters,
        jitter_start: f64,
    ) -> Result<Self> {
        hyper.validate()?;
        validate_data(&inputs, &targets, hyper.dim())?;
        let base = kernel_matrix(&inputs, &hyper.lengthscales, hyper.signal_variance);
        let noise = hyper.noise_variance.max(JITTER_FLOOR);

        let mut jitter = 0.0;
        let factor = loop {
            let mut k = base.clone();
            for i in 0..k.nrows() {
                k[(i, i)] += noise + jitter;
            }
            if let Some(chol) = Cholesky::new(k) {
                break chol;
            }
            jitter = if jitter == 0.0 { jitter_start.max(JITTER_FLOOR) } else { jitter * 10.0 };
            if jitter > JITTER_MAX * (1.0 + 1e-12) {
                let mut k = base.clone();
                for i in 0..k.nrows() {
                    k[(i, i)] += noise;
                }
                return Err(Error::Cholesky { jitter: jitter / 10.0, condition: condition_number(k) });
            }
        };

        let y = DVector::from_iterator(
            targets.len(),
            targets.iter().map(|t| t - hyper.constant_mean),
        );
        let alpha = factor.solve(&y);
        let hyper = GpHyperparameters { noise_variance: noise + jitter, ..hyper };
        Ok(Self { hyper, inputs, targets, factor: factor.unpack(), alpha, jitter })
    }

    /// Fit hyperparameters by maximum marginal likelihood and condition on the data.
    pub fn fit(observations: &[(Vec<f64>, f64)], opts: &FitOptions) -> Result<Self> {
        let (inputs, targets): (Vec<Vec<f64>>, Vec<f64>) = observations.iter().cloned().unzip();
        if inputs.len() < 2 {
            return Err(Error::invalid(format!(
                "GP fitting needs at least 2 observations, got {}",
                inputs.len()
            )));
        }
        if opts.starts == 0 {
            return Err(Error::invalid("GP fitting needs at least one start"));
        }
        let d = inputs[0].len();
        validate_data(&inputs, &targets, d)?;

        let sq = SquaredDiffs::new(&inputs);
        let y = DVector::from_column_slice(&targets);
        let (lower, upper) = log_bounds(d);
        let search = PatternSearch {
            initial_step: 0.25,
            min_step: 1e-3,
            shrink: 0.5,
            max_evals: opts.max_evals_per_start,
        };

        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for start in 0..opts.starts {
            let x0: Vec<f64> = if start == 0 {
                let mut x = vec![0.5f64.ln(); d];
                x.push(0.0);
                x.push(1e-3f64.ln());
                x
            } else {
                lower.iter().zip(&upper).map(|(l, u)| rng.random_range(*l..=*u)).collect()
            };
            let res = search.maximize(|theta| profiled_lml(&sq, &y, theta).0, &x0, &lower, &upper);
            if res.value.is_finite() && best.as_ref().is_none_or(|(v, _)| res.value > *v) {
                best = Some((res.value, res.x));
            }
        }

        let theta = match best {
            Some((_, theta)) => theta,
            None => {
                // No start produced a factorizable matrix; fall back to the default start
                // and let conditioning escalate jitter.
                let mut x = vec![0.5f64.ln(); d];
                x.push(0.0);
                x.push(1e-3f64.ln());
                x
            }
        };
        let (_, mean) = profiled_lml(&sq, &y, &theta);
        let hyper = hyper_from_log(&theta, if mean.is_finite() { mean } else { 0.0 });
        Self::condition(inputs, targets, hyper, opts.jitter_start)
    }

    pub fn hyperparameters(&self) -> &GpHyperparameters {
        &self.hyper
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Lower-triangular `L` with `L Lᵀ = K + noise·I`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// Jitter that had to be added beyond the requested noise variance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.hyper.dim()
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn predict(&self, x: &[f64]) -> Result<PosteriorPrediction> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let h = &self.hyper;
        let k_star = DVector::from_iterator(
            self.inputs.len(),
            self.inputs
                .iter()
                .map(|xi| matern52_of_r(scaled_distance(x, xi, &h.lengthscales), h.signal_variance)),
        );
        let mean = h.constant_mean + k_star.dot(&self.alpha);
        let v = self
            .factor
            .solve_lower_triangular(&k_star)
            .expect("cholesky factor has a positive diagonal");
        let variance = (h.signal_variance - v.norm_squared()).max(0.0);
        Ok(PosteriorPrediction { mean, variance })
    }

    /// `−½ (y−m)ᵀα − Σ log Lᵢᵢ − (n/2) log 2π` at the conditioned hyperparameters.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.targets.len() as f64;
        let fit: f64 = self
            .targets
            .iter()
            .zip(self.alpha.iter())
            .map(|(t, a)| (t - self.hyper.constant_mean) * a)
            .sum();
        let logdet: f64 = self.factor.diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * fit - logdet - 0.5 * n * LN_2PI
    }
}

/// Log marginal likelihood of `targets` under fixed hyperparameters (including the given
/// constant mean).
pub fn log_marginal_likelihood(
    inputs: &[Vec<f64>],
    targets: &[f64],
    hyper: &GpHyperparameters,
) -> Result<f64> {
    if inputs.len() < 2 {
        return Err(Error::invalid("log marginal likelihood needs at least 2 observations"));
    }
    let model = GpModel::condition(inputs.to_vec(), targets.to_vec(), hyper.clone(), JITTER_FLOOR)?;
    Ok(model.log_marginal_likelihood())
}

/// Zero-mean, unit-variance scaling of one objective's targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub mean: f64,
    pub scale: f64,
}

impl Standardizer {
    /// Degenerate (zero-variance) targets use unit scale.
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let scale = if var > 0.0 && var.is_finite() { var.sqrt() } else { 1.0 };
        Self { mean, scale }
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.scale
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * self.scale + self.mean
    }

    pub fn invert_variance(&self, v: f64) -> f64 {
        v * self.scale * self.scale
    }
}

fn validate_data(inputs: &[Vec<f64>], targets: &[f64], d: usize) -> Result<()> {
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), found: targets.len() });
    }
    if inputs.is_empty() {
        return Err(Error::Empty("GP training data"));
    }
    for x in inputs {
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("GP input"));
        }
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("GP target"));
    }
    Ok(())
}

fn kernel_matrix(inputs: &[Vec<f64>], lengthscales: &[f64], signal: f64) -> DMatrix<f64> {
    let n = inputs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = signal;
        for j in 0..i {
            let v = matern52_of_r(scaled_distance(&inputs[i], &inputs[j], lengthscales), signal);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

fn condition_number(k: DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(k).eigenvalues;
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Per-dimension squared input differences, lower triangle, cached across likelihood
/// evaluations.
struct SquaredDiffs {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl SquaredDiffs {
    fn new(inputs: &[Vec<f64>]) -> Self {
        let n = inputs.len();
        let d = inputs[0].len();
        let mut data = Vec::with_capacity(n * (n - 1) / 2 * d);
        for i in 0..n {
            for j in 0..i {
                data.extend(inputs[i].iter().zip(&inputs[j]).map(|(a, b)| (a - b) * (a - b)));
            }
        }
        Self { n, d, data }
    }

    fn kernel_matrix(&self, inv_sq_ls: &[f64], signal: f64, noise: f64) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(self.n, self.n);
        let mut chunks = self.data.chunks_exact(self.d);
        for i in 0..self.n {
            k[(i, i)] = signal + noise;
            for j in 0..i {
                let c = chunks.next().unwrap();
                let r2: f64 = c.iter().zip(inv_sq_ls).map(|(a, b)| a * b).sum();
                let v = matern52_of_r(r2.sqrt(), signal);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

fn log_bounds(d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lower = vec![LENGTHSCALE_BOUNDS.0.ln(); d];
    let mut upper = vec![LENGTHSCALE_BOUNDS.1.ln(); d];
    lower.push(SIGNAL_VARIANCE_BOUNDS.0.ln());
    upper.push(SIGNAL_VARIANCE_BOUNDS.1.ln());
    lower.push(NOISE_VARIANCE_BOUNDS.0.ln());
    upper.push(NOISE_VARIANCE_BOUNDS.1.ln());
    (lower, upper)
}

fn hyper_from_log(theta: &[f64], mean: f64) -> GpHyperparameters {
    let d = theta.len() - 2;
    GpHyperparameters {
        lengthscales: theta[..d].iter().map(|t| t.exp()).collect(),
        signal_variance: theta[d].exp(),
        noise_variance: theta[d + 1].exp(),
        constant_mean: mean,
    }
}

/// Log marginal likelihood with the constant mean profiled out by GLS. Returns
/// `(lml, mean)`; `lml` is `-∞` when the kernel matrix cannot be factorized.
fn profiled_lml(sq: &SquaredDiffs, y: &DVector<f64>, theta: &[f64]) -> (f64, f64) {
    let d = sq.d;
    let inv_sq_ls: Vec<f64> = theta[..d].iter().map(|t| (-2.0 * t).exp()).collect();
    let signal = theta[d].exp();
    let noise = theta[d + 1].exp().max(JITTER_FLOOR);
    let k = sq.kernel_matrix(&inv_sq_ls, signal, noise);
    let Some(chol): Option<Cholesky<f64, Dyn>> = Cholesky::new(k) else {
        return (f64::NEG_INFINITY, f64::NAN);
    };
    let ones = DVector::from_element(sq.n, 1.0);
    let k_inv_ones = chol.solve(&ones);
    let k_inv_y = chol.solve(y);
    let mean = k_inv_ones.dot(y) / k_inv_ones.dot(&ones);
    let resid = y - DVector::from_element(sq.n, mean);
    let alpha = &k_inv_y - &k_inv_ones * mean;
    let logdet: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    let lml = -0.5 * resid.dot(&alpha) - logdet - 0.5 * sq.n as f64 * LN_2PI;
    (lml, mean)
}
