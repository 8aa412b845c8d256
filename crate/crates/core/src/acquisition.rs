//! Expected improvement, expected hypervolume improvement, and acquisition maximisation.
//!
//! Objectives are modelled by independent GPs, so the predictive distribution at a point
//! is a product of univariate Gaussians. For two objectives EHVI is computed exactly:
//! the region above the reference point and not dominated by the front splits into
//! vertical strips, and on each strip the integrand `P(Y₁ ≥ z₁) P(Y₂ ≥ z₂)` separates
//! into two one-dimensional closed forms. Other dimensions use Monte Carlo with common
//! random numbers, so the estimate is a deterministic function of the candidate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::optim::PatternSearch;
use crate::pareto::{hv_exact, ParetoFront, ReferencePoint};
use crate::sobol;
use crate::stats::{normal_cdf, normal_pdf, normal_sf};

/// Standard deviations below this are treated as point masses.
const DEGENERATE_SD: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct AcquisitionContext {
    pub models: Vec<GpModel>,
    /// Front in the same (standardised) units as the models' targets.
    pub front: ParetoFront,
    pub reference: ReferencePoint,
    pub mc_samples: usize,
    pub seed: u64,
}

impl AcquisitionContext {
    pub fn objective_dim(&self) -> usize {
        self.models.len()
    }

    pub fn input_dim(&self) -> usize {
        self.models.first().map_or(0, GpModel::dim)
    }

    fn validate(&self) -> Result<()> {
        let m = self.models.len();
        if m < 2 {
            return Err(Error::invalid(format!("need at least 2 objective models, got {m}")));
        }
        if self.front.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, found: self.front.dim() });
        }
        if self.reference.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, found: self.reference.dim() });
        }
        let d = self.input_dim();
        if let Some(bad) = self.models.iter().find(|g| g.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
        }
        Ok(())
    }

    /// Posterior means and standard deviations of every objective at `x`.
    pub fn moments(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut mu = Vec::with_capacity(self.models.len());
        let mut sd = Vec::with_capacity(self.models.len());
        for g in &self.models {
            let p = g.predict(x)?;
            mu.push(p.mean);
            sd.push(p.std_dev());
        }
        Ok((mu, sd))
    }

    fn front_points(&self) -> Vec<&[f64]> {
        self.front.points().iter().map(|p| p.values()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcquisitionMethod {
    Exact2d,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateProposal {
    /// Point in the unit cube.
    pub weight_vector: Vec<f64>,
    pub acquisition_value: f64,
    pub method: AcquisitionMethod,
    /// Every scanned acquisition value was zero; the point maximises posterior variance.
    pub exploration_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBudget {
    pub scan: usize,
    pub restarts: usize,
    pub refine_evals: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { scan: 512, restarts: 4, refine_evals: 150 }
    }
}

/// Closed-form EI for maximisation given a Gaussian `N(mean, sd²)`.
pub fn expected_improvement_from_moments(mean: f64, sd: f64, best: f64) -> f64 {
    if sd <= DEGENERATE_SD {
        return (mean - best).max(0.0);
    }
    let z = (mean - best) / sd;
    (sd * normal_pdf(z) + (mean - best) * normal_cdf(z)).max(0.0)
}

pub fn expected_improvement(model: &GpModel, x: &[f64], best: f64) -> Result<f64> {
    let p = model.predict(x)?;
    Ok(expected_improvement_from_moments(p.mean, p.std_dev(), best))
}

/// `∫_c^∞ P(Y ≥ z) dz` for `Y ~ N(mean, sd²)`.
fn upper_partial_mean(c: f64, mean: f64, sd: f64) -> f64 {
    if c == f64::INFINITY {
        return 0.0;
    }
    if sd <= DEGENERATE_SD {
        return (mean - c).max(0.0);
    }
    let t = (c - mean) / sd;
    (sd * normal_pdf(t) + (mean - c) * normal_sf(t)).max(0.0)
}

/// Exact bi-objective EHVI for independent Gaussian predictions.
pub fn ehvi_2d_from_moments(front: &[&[f64]], r: [f64; 2], mean: [f64; 2], sd: [f64; 2]) -> f64 {
    let mut pts: Vec<[f64; 2]> = front
        .iter()
        .filter(|p| p[0] > r[0] && p[1] > r[1])
        .map(|p| [p[0], p[1]])
        .collect();
    // Ascending in the first coordinate; keep only the staircase (second coordinate
    // strictly decreasing).
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(b[1].total_cmp(&a[1])));
    let mut stairs: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for p in pts.into_iter().rev() {
        if stairs.last().is_none_or(|q| p[1] > q[1]) {
            stairs.push(p);
        }
    }
    stairs.reverse();

    let g1 = |c: f64| upper_partial_mean(c, mean[0], sd[0]);
    let g2 = |c: f64| upper_partial_mean(c, mean[1], sd[1]);

    let mut total = 0.0;
    let mut left = r[0];
    for q in &stairs {
        // Strip [left, q₁): non-dominated above q₂.
        let width = g1(left) - g1(q[0]);
        if width > 0.0 {
            total += width * g2(q[1]);
        }
        left = q[0];
    }
    total += g1(left) * g2(r[1]);
    total.max(0.0)
}

/// Monte Carlo EHVI with `samples` joint draws from `seed`. Returns `(estimate, std_error)`.
pub fn ehvi_mc_from_moments(
    front: &[&[f64]],
    r: &[f64],
    mean: &[f64],
    sd: &[f64],
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::invalid("monte carlo EHVI needs mc_samples > 0"));
    }
    let m = r.len();
    if mean.len() != m || sd.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: mean.len().min(sd.len()) });
    }
    let base = hv_exact(front, r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; m];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        for j in 0..m {
            let e: f64 = StandardNormal.sample(&mut rng);
            y[j] = mean[j] + sd[j] * e;
        }
        let hvi = if y.iter().zip(r).all(|(a, b)| a > b) {
            let mut pts: Vec<&[f64]> = Vec::with_capacity(front.len() + 1);
            pts.extend_from_slice(front);
            pts.push(&y);
            (hv_exact(&pts, r) - base).max(0.0)
        } else {
            0.0
        };
        sum += hvi;
        sum_sq += hvi * hvi;
    }
    let n = samples as f64;
    let est = sum / n;
    let var = if samples > 1 { ((sum_sq - n * est * est) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok((est, (var / n).sqrt()))
}

pub fn ehvi_exact_2d(ctx: &AcquisitionContext, x: &[f64]) -> Result<f64> {
    ctx.validate()?;
    if ctx.objective_dim() != 2 {
        return Err(Error::invalid(format!(
            "exact EHVI needs 2 objectives, got {}",
            ctx.objective_dim()
        )));
    }
    let (mu, sd) = ctx.moments(x)?;
    let r = ctx.reference.values();
    Ok(ehvi_2d_from_moments(&ctx.front_points(), [r[0], r[1]], [mu[0], mu[1]], [sd[0], sd[1]]))
}

pub fn ehvi_monte_carlo(ctx: &AcquisitionContext, x: &[f64]) -> Result<(f64, f64)> {
    ctx.validate()?;
    let (mu, sd) = ctx.moments(x)?;
    ehvi_mc_from_moments(
        &ctx.front_points(),
        ctx.reference.values(),
        &mu,
        &sd,
        ctx.mc_samples,
        ctx.seed,
    )
}

/// The acquisition used by [`propose_next`]: exact for two objectives, Monte Carlo otherwise.
pub fn acquisition_value(ctx: &AcquisitionContext, x: &[f64]) -> Result<f64> {
    if ctx.objective_dim() == 2 {
        ehvi_exact_2d(ctx, x)
    } else {
        Ok(ehvi_monte_carlo(ctx, x)?.0)
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Higher value wins; ties go to the lexicographically smallest point.
fn better(a: (f64, &[f64]), b: (f64, &[f64])) -> bool {
    a.0 > b.0 || (a.0 == b.0 && lex_less(a.1, b.1))
}

/// Maximise the acquisition over the unit cube: a scrambled Sobol scan followed by
/// pattern-search refinement from the best scan points.
pub fn propose_next(
    ctx: &AcquisitionContext,
    budget: &SearchBudget,
    seed: u64,
) -> Result<CandidateProposal> {
    ctx.validate()?;
    if budget.scan == 0 {
        return Err(Error::invalid("acquisition scan budget must be positive"));
    }
    if ctx.objective_dim() != 2 && ctx.mc_samples == 0 {
        return Err(Error::invalid("monte carlo EHVI needs mc_samples > 0"));
    }
    let d = ctx.input_dim();
    let method = if ctx.objective_dim() == 2 {
        AcquisitionMethod::Exact2d
    } else {
        AcquisitionMethod::MonteCarlo
    };

    let scan = sobol::points(budget.scan, d, seed)?;
    let values: Vec<f64> = scan
        .iter()
        .map(|x| acquisition_value(ctx, x))
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..scan.len()).collect();
    order.sort_by(|&a, &b| {
        if better((values[a], &scan[a]), (values[b], &scan[b])) {
            std::cmp::Ordering::Less
        } else if better((values[b], &scan[b]), (values[a], &scan[a])) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });

    let mut best_x = scan[order[0]].clone();
    let mut best_v = values[order[0]];

    let lower = vec![0.0; d];
    let upper = vec![1.0; d];
    let search = PatternSearch {
        initial_step: 0.05,
        min_step: 1e-4,
        shrink: 0.5,
        max_evals: budget.refine_evals,
    };
    for &i in order.iter().take(budget.restarts) {
        if values[i] <= 0.0 {
            break;
        }
        let res = search.maximize(
            |x| acquisition_value(ctx, x).unwrap_or(f64::NEG_INFINITY),
            &scan[i],
            &lower,
            &upper,
        );
        if better((res.value, &res.x), (best_v, &best_x)) {
            best_v = res.value;
            best_x = res.x;
        }
    }

    if best_v > 0.0 {
        return Ok(CandidateProposal {
            weight_vector: best_x,
            acquisition_value: best_v,
            method,
            exploration_fallback: false,
        });
    }

    // Flat acquisition: explore where the surrogates are least certain.
    let mut pick: Option<(f64, &Vec<f64>)> = None;
    for x in &scan {
        let (_, sd) = ctx.moments(x)?;
        let total: f64 = sd.iter().map(|s| s * s).sum();
        if pick.is_none_or(|(v, px)| better((total, x), (v, px))) {
            pick = Some((total, x));
        }
    }
    let (_, x) = pick.expect("scan is non-empty");
    Ok(CandidateProposal {
        weight_vector: x.clone(),
        acquisition_value: 0.0,
        method,
        exploration_fallback: true,
    })
}
