//! The optimisation loop: warm start, then repeatedly fit surrogates, propose a weight
//! vector, evaluate it and archive the result.
//!
//! Observation `i` uses seed `mix_seed(master, i)`. Warm-start weights come from a scrambled
//! Sobol stream keyed by `mix_seed(master, u64::MAX)`, and the GP for objective `j` at
//! step `i` is fitted with `mix_seed(seed_i, 1000 + j)`. Nothing else draws randomness, so
//! a resumed run repeats an uninterrupted one exactly.

pub mod archive;
pub mod config;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acquisition::{propose_next, AcquisitionContext, CandidateProposal, SearchBudget};
use crate::error::{Error, Result};
use crate::gp::{FitOptions, GpModel, Standardizer, JITTER_FLOOR};
use crate::pareto::{
    estimate_hypervolume, extract_front, hypervolume, ObjectiveVector, ParetoFront,
    ReferencePoint,
};
use crate::sobol;
use crate::stats::mix_seed;

pub use archive::{
    read_archive, ArchiveContents, ArchiveLock, ArchiveWriter, LineError, Observation,
    ParetoArchive, Phase, ARCHIVE_VERSION,
};
pub use config::{RunConfig, WeightBound, DEFAULT_CONFIG_TOML};

/// Jitter used for the single retry after a failed GP fit.
pub const RETRY_JITTER: f64 = 1e-4;
/// Smallest distance between the reference point and the observed minimum.
pub const MIN_REFERENCE_SLACK: f64 = 1e-6;
/// Monte Carlo samples for hypervolume reports with four or more objectives.
const HV_REPORT_SAMPLES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Maximize,
    Minimize,
}

impl Orientation {
    /// Raw values to maximise-all form.
    pub fn canonicalize(orientation: &[Orientation], raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(orientation)
            .map(|(v, o)| match o {
                Orientation::Maximize => *v,
                Orientation::Minimize => -v,
            })
            .collect()
    }

    /// Inverse of [`Orientation::canonicalize`].
    pub fn to_raw(orientation: &[Orientation], canonical: &[f64]) -> Vec<f64> {
        Self::canonicalize(orientation, canonical)
    }
}

/// The expensive black box: trains with the given weights and reports raw objectives.
pub trait Evaluator {
    fn objective_count(&self) -> usize;

    fn train_and_eval(&mut self, weights: &[f64]) -> Result<Vec<f64>>;

    /// Bring internal state to where it would be after `train_and_eval(weights)`, without
    /// needing the objectives. Used when resuming; stateless evaluators do nothing.
    fn replay(&mut self, weights: &[f64]) -> Result<()> {
        let _ = weights;
        Ok(())
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn objective_count(&self) -> usize {
        (**self).objective_count()
    }

    fn train_and_eval(&mut self, weights: &[f64]) -> Result<Vec<f64>> {
        (**self).train_and_eval(weights)
    }

    fn replay(&mut self, weights: &[f64]) -> Result<()> {
        (**self).replay(weights)
    }
}

/// Component-wise minimum minus `slack` times the range, at least
/// [`MIN_REFERENCE_SLACK`] below the minimum.
pub fn reference_point(points: &[ObjectiveVector], slack: f64) -> Result<ReferencePoint> {
    let first = points.first().ok_or(Error::Empty("reference point"))?;
    let m = first.dim();
    let mut lo = first.values().to_vec();
    let mut hi = lo.clone();
    for p in points {
        if p.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, found: p.dim() });
        }
        for (k, v) in p.values().iter().enumerate() {
            lo[k] = lo[k].min(*v);
            hi[k] = hi[k].max(*v);
        }
    }
    let r = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| l - (slack * (h - l)).max(MIN_REFERENCE_SLACK))
        .collect();
    ReferencePoint::new(r)
}

/// Hypervolume of a front: exact for two or three objectives, otherwise a fixed-seed
/// Monte Carlo estimate.
pub fn front_hypervolume(front: &ParetoFront, r: &ReferencePoint) -> Result<f64> {
    if front.is_empty() {
        return Ok(0.0);
    }
    match front.dim() {
        2 | 3 => hypervolume(front, r),
        _ => Ok(estimate_hypervolume(front, r, HV_REPORT_SAMPLES, 0)?.value),
    }
}

/// Hypervolume after each observation, measured against one reference point computed from
/// the whole archive.
pub fn hypervolume_trace(observations: &[Observation], slack: f64) -> Result<Vec<f64>> {
    if observations.is_empty() {
        return Ok(Vec::new());
    }
    let canonical: Vec<ObjectiveVector> =
        observations.iter().map(Observation::canonical).collect::<Result<_>>()?;
    let r = reference_point(&canonical, slack)?;
    let mut archive = ParetoArchive::new();
    let mut trace = Vec::with_capacity(observations.len());
    for obs in observations {
        archive.push(obs.clone())?;
        trace.push(front_hypervolume(&archive.front()?, &r)?);
    }
    Ok(trace)
}

/// Where the next observation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextAction {
    Pretrain,
    WarmStart { index: usize },
    Optimize,
    Done,
}

/// What one call to [`Optimizer::step`] produced.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub observation: Observation,
    /// Canonical reference point used by the acquisition; warm-start steps have none.
    pub reference: Option<Vec<f64>>,
    pub proposal: Option<CandidateProposal>,
    pub front_size: usize,
    /// Archive hypervolume against a reference recomputed from all observations so far.
    pub hypervolume: f64,
}

/// Drives one run. Holds the evaluator, the archive and, when persisting, the archive file
/// and its lock.
pub struct Optimizer<E: Evaluator> {
    config: RunConfig,
    evaluator: E,
    archive: ParetoArchive,
    bounds: Vec<WeightBound>,
    writer: Option<ArchiveWriter>,
    _lock: Option<ArchiveLock>,
}

impl<E: Evaluator> Optimizer<E> {
    /// In-memory run with no archive file.
    pub fn new(config: RunConfig, evaluator: E) -> Result<Self> {
        config.validate()?;
        if evaluator.objective_count() != config.objective_dim() {
            return Err(Error::Config(format!(
                "evaluator reports {} objectives but {} are configured",
                evaluator.objective_count(),
                config.objective_dim()
            )));
        }
        let bounds = config.weight_bounds()?.into_iter().map(|(_, b)| b).collect();
        Ok(Self { config, evaluator, archive: ParetoArchive::new(), bounds, writer: None, _lock: None })
    }

    /// Start a new persisted run. The archive file must not exist or be empty.
    pub fn create(config: RunConfig, evaluator: E, path: &Path) -> Result<Self> {
        let mut opt = Self::new(config, evaluator)?;
        let lock = ArchiveLock::acquire(path)?;
        if path.exists() && std::fs::metadata(path)?.len() > 0 {
            return Err(Error::Archive {
                path: path.to_path_buf(),
                line: 0,
                message: "archive already has records; use resume".into(),
            });
        }
        opt.writer = Some(ArchiveWriter::open(path)?);
        opt._lock = Some(lock);
        Ok(opt)
    }

    /// Continue a persisted run. Records are checked against the configuration and the
    /// seed schedule, the evaluator is replayed through them, and an interrupted final
    /// write is discarded.
    pub fn resume(config: RunConfig, evaluator: E, path: &Path) -> Result<Self> {
        let mut opt = Self::new(config, evaluator)?;
        let lock = ArchiveLock::acquire(path)?;
        let contents = read_archive(path)?;
        let archive_err = |line: usize, message: String| Error::Archive {
            path: path.to_path_buf(),
            line,
            message,
        };
        let tail_line = contents.partial_tail.and_then(|_| contents.errors.last()).map(|e| e.line);
        if let Some(bad) = contents.errors.iter().find(|e| Some(e.line) != tail_line) {
            return Err(archive_err(bad.line, bad.message.clone()));
        }
        let orientation = &opt.config.objectives.orientation;
        let d = opt.bounds.len();
        for (i, obs) in contents.observations.iter().enumerate() {
            let line = i + 1;
            if obs.iteration != i {
                return Err(archive_err(line, format!("expected iteration {i}, found {}", obs.iteration)));
            }
            if obs.seed != opt.seed_for(i) {
                return Err(archive_err(line, "seed does not match the configured master seed".into()));
            }
            if &obs.orientation != orientation || obs.weights.len() != d {
                return Err(archive_err(line, "record does not match the configured problem".into()));
            }
            if i >= opt.config.planned_observations() {
                return Err(archive_err(line, "archive is longer than the configured run".into()));
            }
        }

        let mut writer = ArchiveWriter::open(path)?;
        if let Some(offset) = contents.partial_tail {
            log::warn!("discarding interrupted final record in {}", path.display());
            writer.truncate_to(offset)?;
        }
        for obs in &contents.observations {
            opt.evaluator.replay(&obs.weights)?;
        }
        opt.archive = ParetoArchive::from_observations(contents.observations)?;
        opt.writer = Some(writer);
        opt._lock = Some(lock);
        Ok(opt)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn archive(&self) -> &ParetoArchive {
        &self.archive
    }

    pub fn evaluator(&self) -> &E {
        &self.evaluator
    }

    pub fn archive_path(&self) -> Option<PathBuf> {
        self.writer.as_ref().map(|w| w.path().to_path_buf())
    }

    pub fn into_archive(self) -> ParetoArchive {
        self.archive
    }

    fn seed_for(&self, iteration: usize) -> u64 {
        mix_seed(self.config.engine.seed, iteration as u64)
    }

    pub fn next_action(&self) -> NextAction {
        let n = self.archive.len();
        let pretrain = self.config.pretrain_count();
        if n < pretrain {
            NextAction::Pretrain
        } else if n < self.config.warm_count() {
            NextAction::WarmStart { index: n - pretrain }
        } else if n < self.config.planned_observations() {
            NextAction::Optimize
        } else {
            NextAction::Done
        }
    }

    pub fn is_done(&self) -> bool {
        self.next_action() == NextAction::Done
    }

    /// Warm-start weight vector `index` in configured units.
    pub fn warm_weights(&self, index: usize) -> Result<Vec<f64>> {
        warm_sample(&self.config, index)
    }

    /// Produce, evaluate and archive the next observation.
    pub fn step(&mut self) -> Result<StepReport> {
        let iteration = self.archive.len();
        let seed = self.seed_for(iteration);
        let (weights, phase, fit_s, propose_s, reference, proposal) = match self.next_action() {
            NextAction::Done => {
                return Err(Error::invalid("the configured number of observations is reached"))
            }
            NextAction::Pretrain => {
                let w = self.config.engine.warm_weights.clone().unwrap_or_default();
                (w, Phase::WarmStart, 0.0, 0.0, None, None)
            }
            NextAction::WarmStart { index } => {
                (self.warm_weights(index)?, Phase::WarmStart, 0.0, 0.0, None, None)
            }
            NextAction::Optimize => {
                let t = Instant::now();
                let (models, scalers) = self.fit_models(seed)?;
                let fit_s = t.elapsed().as_secs_f64();

                let t = Instant::now();
                let r = reference_point(self.archive.canonical(), self.config.engine.reference_slack)?;
                let ctx = self.acquisition_context(models, &scalers, &r, seed)?;
                let budget = SearchBudget {
                    scan: self.config.engine.scan,
                    restarts: self.config.engine.restarts,
                    refine_evals: self.config.engine.refine_evals,
                };
                let proposal = propose_next(&ctx, &budget, seed)?;
                let w = self.denormalize(&proposal.weight_vector);
                let propose_s = t.elapsed().as_secs_f64();
                (w, Phase::Optimized, fit_s, propose_s, Some(r.values().to_vec()), Some(proposal))
            }
        };

        let t = Instant::now();
        let raw = self.evaluator.train_and_eval(&weights).map_err(|e| match e {
            Error::Evaluator { .. } => e,
            other => Error::Evaluator { weights: weights.clone(), message: other.to_string() },
        })?;
        let eval_s = t.elapsed().as_secs_f64();
        if raw.len() != self.config.objective_dim() || raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluator {
                weights,
                message: format!("expected {} finite objectives, got {raw:?}", self.config.objective_dim()),
            });
        }

        let obs = Observation {
            version: ARCHIVE_VERSION,
            iteration,
            phase,
            weights,
            objectives_raw: raw,
            orientation: self.config.objectives.orientation.clone(),
            eval_wall_seconds: eval_s,
            fit_wall_seconds: fit_s,
            propose_wall_seconds: propose_s,
            seed,
        };
        if let Some(w) = self.writer.as_mut() {
            w.append(&obs)?;
        }
        self.archive.push(obs.clone())?;

        let r = reference_point(self.archive.canonical(), self.config.engine.reference_slack)?;
        let hv = front_hypervolume(&self.archive.front()?, &r)?;
        Ok(StepReport {
            observation: obs,
            reference,
            proposal,
            front_size: self.archive.front_indices().len(),
            hypervolume: hv,
        })
    }

    /// Step until the run is complete.
    pub fn run(&mut self) -> Result<&ParetoArchive> {
        self.run_until(usize::MAX, |_| {})
    }

    /// Step until `max_observations` are archived or the run is complete, calling
    /// `on_step` after each observation.
    pub fn run_until(
        &mut self,
        max_observations: usize,
        mut on_step: impl FnMut(&StepReport),
    ) -> Result<&ParetoArchive> {
        while !self.is_done() && self.archive.len() < max_observations {
            let report = self.step()?;
            on_step(&report);
        }
        Ok(&self.archive)
    }

    fn normalize(&self, w: &[f64]) -> Vec<f64> {
        w.iter()
            .zip(&self.bounds)
            .map(|(v, b)| ((v - b.low) / (b.high - b.low)).clamp(0.0, 1.0))
            .collect()
    }

    fn denormalize(&self, x: &[f64]) -> Vec<f64> {
        denormalize(&self.bounds, x)
    }

    /// Observations the surrogates are fitted on.
    fn window(&self) -> &[Observation] {
        let obs = self.archive.observations();
        match self.config.engine.window {
            0 => obs,
            w => &obs[obs.len().saturating_sub(w)..],
        }
    }

    fn fit_models(&self, seed: u64) -> Result<(Vec<GpModel>, Vec<Standardizer>)> {
        let window = self.window();
        let inputs: Vec<Vec<f64>> = window.iter().map(|o| self.normalize(&o.weights)).collect();
        let canonical: Vec<Vec<f64>> = window
            .iter()
            .map(|o| Orientation::canonicalize(&o.orientation, &o.objectives_raw))
            .collect();
        let m = self.config.objective_dim();
        let mut models = Vec::with_capacity(m);
        let mut scalers = Vec::with_capacity(m);
        for j in 0..m {
            let values: Vec<f64> = canonical.iter().map(|c| c[j]).collect();
            let s = Standardizer::fit(&values);
            let data: Vec<(Vec<f64>, f64)> =
                inputs.iter().cloned().zip(values.iter().map(|v| s.apply(*v))).collect();
            let mut opts = FitOptions {
                starts: self.config.engine.gp_starts,
                max_evals_per_start: self.config.engine.gp_max_evals,
                seed: mix_seed(seed, 1000 + j as u64),
                jitter_start: JITTER_FLOOR,
            };
            let model = match GpModel::fit(&data, &opts) {
                Err(Error::Cholesky { .. }) => {
                    log::warn!("GP fit for objective {j} failed; retrying with jitter {RETRY_JITTER:e}");
                    opts.jitter_start = RETRY_JITTER;
                    GpModel::fit(&data, &opts)?
                }
                other => other?,
            };
            models.push(model);
            scalers.push(s);
        }
        Ok((models, scalers))
    }

    fn acquisition_context(
        &self,
        models: Vec<GpModel>,
        scalers: &[Standardizer],
        r: &ReferencePoint,
        seed: u64,
    ) -> Result<AcquisitionContext> {
        let scale = |v: &[f64]| -> Vec<f64> {
            v.iter().zip(scalers).map(|(x, s)| s.apply(*x)).collect()
        };
        let front_pts: Vec<ObjectiveVector> = self
            .archive
            .front_indices()
            .iter()
            .map(|&i| ObjectiveVector::new(scale(self.archive.canonical()[i].values())))
            .collect::<Result<_>>()?;
        Ok(AcquisitionContext {
            models,
            front: extract_front(&front_pts)?,
            reference: ReferencePoint::new(scale(r.values()))?,
            mc_samples: self.config.engine.mc_samples,
            seed: mix_seed(seed, 2000),
        })
    }
}

fn denormalize(bounds: &[WeightBound], x: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(bounds)
        .map(|(v, b)| (b.low + v * (b.high - b.low)).clamp(b.low, b.high))
        .collect()
}

/// The `index`-th vector of the warm-start stream in configured units. Indices past
/// `warm_start_count` continue the same stream.
pub fn warm_sample(config: &RunConfig, index: usize) -> Result<Vec<f64>> {
    let bounds: Vec<WeightBound> = config.weight_bounds()?.into_iter().map(|(_, b)| b).collect();
    let index = u32::try_from(index).map_err(|_| Error::invalid("warm-start index too large"))?;
    let x = sobol::point(index, bounds.len(), mix_seed(config.engine.seed, u64::MAX))?;
    Ok(denormalize(&bounds, &x))
}
