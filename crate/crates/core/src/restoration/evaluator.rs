//! The restoration bench as a black-box [`Evaluator`].

use serde::{Deserialize, Serialize};

use crate::engine::{Evaluator, Orientation};
use crate::error::{Error, Result};
use crate::restoration::dataset::{synthesize_dataset, Dataset};
use crate::restoration::loss::LossKind;
use crate::restoration::metrics::{evaluate_metrics, MetricKind, MetricVector, DEFAULT_PSNR_CAP};
use crate::restoration::restorer::{check_size, RestorerParams};
use crate::restoration::trainer::Trainer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorMode {
    /// One model trained across all evaluations.
    Stateful,
    /// Every evaluation starts from the initial model.
    Fresh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestorationSettings {
    pub mode: EvaluatorMode,
    pub dataset_seed: u64,
    pub image_count: usize,
    pub image_size: usize,
    pub scale: usize,
    pub filter_size: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub grad_clip: f64,
    pub psnr_cap: f64,
}

impl Default for RestorationSettings {
    fn default() -> Self {
        Self {
            mode: EvaluatorMode::Stateful,
            dataset_seed: 7,
            image_count: 10,
            image_size: 32,
            scale: 2,
            filter_size: 5,
            steps: 10,
            learning_rate: 0.05,
            grad_clip: 1.0,
            psnr_cap: DEFAULT_PSNR_CAP,
        }
    }
}

impl RestorationSettings {
    pub fn validate(&self) -> Result<()> {
        if self.scale == 0 || self.image_size % self.scale != 0 {
            return Err(Error::invalid(format!(
                "image_size {} must be divisible by scale {}",
                self.image_size, self.scale
            )));
        }
        if self.image_size / self.scale < 8 {
            return Err(Error::invalid("low-resolution images must be at least 8 pixels wide"));
        }
        if self.image_count < 2 {
            return Err(Error::invalid("image_count must be at least 2"));
        }
        check_size(self.filter_size)?;
        if self.steps == 0 {
            return Err(Error::invalid("steps must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        if !(self.grad_clip > 0.0 && self.grad_clip.is_finite()) {
            return Err(Error::invalid("grad_clip must be positive"));
        }
        Ok(())
    }
}

/// Trains the restorer with the given loss weights and reports validation metrics.
pub struct RestorationEvaluator {
    settings: RestorationSettings,
    metrics: Vec<MetricKind>,
    dataset: Dataset,
    trainer: Trainer,
    params: RestorerParams,
}

impl RestorationEvaluator {
    pub fn new(settings: RestorationSettings, losses: Vec<LossKind>, metrics: Vec<MetricKind>) -> Result<Self> {
        settings.validate()?;
        if losses.is_empty() {
            return Err(Error::invalid("at least one loss must be enabled"));
        }
        if metrics.len() < 2 {
            return Err(Error::invalid("at least two metrics are needed as objectives"));
        }
        let dataset = synthesize_dataset(
            settings.dataset_seed,
            settings.image_count,
            settings.image_size,
            settings.scale,
        )?;
        let trainer = Trainer::new(&losses, &dataset.train, settings.filter_size, settings.scale)?;
        let params = RestorerParams::identity(settings.filter_size)?;
        Ok(Self { settings, metrics, dataset, trainer, params })
    }

    pub fn settings(&self) -> &RestorationSettings {
        &self.settings
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn trainer(&self) -> &Trainer {
        &self.trainer
    }

    pub fn params(&self) -> &RestorerParams {
        &self.params
    }

    pub fn orientation(&self) -> Vec<Orientation> {
        self.metrics.iter().map(|m| m.natural_orientation()).collect()
    }

    fn train(&mut self, weights: &[f64]) -> Result<()> {
        if weights.iter().any(|w| *w < 0.0) {
            return Err(Error::invalid(format!("loss weights must be non-negative: {weights:?}")));
        }
        let start = match self.settings.mode {
            EvaluatorMode::Stateful => self.params.clone(),
            EvaluatorMode::Fresh => RestorerParams::identity(self.settings.filter_size)?,
        };
        self.params = self.trainer.train_epoch(
            &start,
            weights,
            self.settings.learning_rate,
            self.settings.steps,
            self.settings.grad_clip,
        )?;
        Ok(())
    }

    /// All metrics of the current model on the validation split.
    pub fn current_metrics(&self) -> Result<MetricVector> {
        evaluate_metrics(&self.params, &self.dataset.validation, self.settings.scale, self.settings.psnr_cap)
    }
}

impl Evaluator for RestorationEvaluator {
    fn objective_count(&self) -> usize {
        self.metrics.len()
    }

    fn train_and_eval(&mut self, weights: &[f64]) -> Result<Vec<f64>> {
        self.train(weights)?;
        let m = self.current_metrics()?;
        Ok(self.metrics.iter().map(|k| m.get(*k)).collect())
    }

    fn replay(&mut self, weights: &[f64]) -> Result<()> {
        match self.settings.mode {
            EvaluatorMode::Stateful => self.train(weights),
            EvaluatorMode::Fresh => Ok(()),
        }
    }
}
