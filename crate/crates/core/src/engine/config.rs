//! Run configuration.
//!
//! A run is described by a TOML file with four sections: `[problem]`, `[objectives]`,
//! `[weights.<name>]` (one per optimised weight, in order) and `[engine]`. Unknown keys are
//! rejected.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::engine::{Evaluator, Orientation};
use crate::error::{Error, Result};
use crate::problems::{AnalyticEvaluator, AnalyticProblem};
use crate::restoration::{
    EvaluatorMode, LossKind, MetricKind, RestorationEvaluator, RestorationSettings,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Restoration,
    Zdt1,
    ToyTradeoff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    /// Input dimension for analytic problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<EvaluatorMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_clip: Option<f64>,
}

impl ProblemConfig {
    pub fn analytic(kind: ProblemKind, dimension: Option<usize>) -> Self {
        Self {
            kind,
            dimension,
            mode: None,
            dataset_seed: None,
            image_count: None,
            image_size: None,
            scale: None,
            filter_size: None,
            steps: None,
            learning_rate: None,
            grad_clip: None,
        }
    }

    fn has_restoration_keys(&self) -> bool {
        self.mode.is_some()
            || self.dataset_seed.is_some()
            || self.image_count.is_some()
            || self.image_size.is_some()
            || self.scale.is_some()
            || self.filter_size.is_some()
            || self.steps.is_some()
            || self.learning_rate.is_some()
            || self.grad_clip.is_some()
    }

    /// Restoration settings with unspecified keys filled from defaults.
    pub fn restoration(&self) -> RestorationSettings {
        let d = RestorationSettings::default();
        RestorationSettings {
            mode: self.mode.unwrap_or(d.mode),
            dataset_seed: self.dataset_seed.unwrap_or(d.dataset_seed),
            image_count: self.image_count.unwrap_or(d.image_count),
            image_size: self.image_size.unwrap_or(d.image_size),
            scale: self.scale.unwrap_or(d.scale),
            filter_size: self.filter_size.unwrap_or(d.filter_size),
            steps: self.steps.unwrap_or(d.steps),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            grad_clip: self.grad_clip.unwrap_or(d.grad_clip),
            ..d
        }
    }

    pub fn analytic_problem(&self) -> Result<Option<AnalyticProblem>> {
        match self.kind {
            ProblemKind::Restoration => Ok(None),
            ProblemKind::Zdt1 => AnalyticProblem::by_name("zdt1", self.dimension).map(Some),
            ProblemKind::ToyTradeoff => {
                AnalyticProblem::by_name("toy_tradeoff", self.dimension).map(Some)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectivesConfig {
    pub names: Vec<String>,
    pub orientation: Vec<Orientation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightBound {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub seed: u64,
    pub warm_start_count: usize,
    /// Fixed weights driven `pretrain_epochs` times before random warm-start sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub pretrain_epochs: usize,
    pub total_iterations: usize,
    pub mc_samples: usize,
    pub scan: usize,
    pub restarts: usize,
    pub refine_evals: usize,
    /// Fit surrogates on the most recent `window` observations; 0 uses all.
    #[serde(default)]
    pub window: usize,
    pub reference_slack: f64,
    pub gp_starts: usize,
    pub gp_max_evals: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            warm_start_count: 8,
            warm_weights: None,
            pretrain_epochs: 0,
            total_iterations: 40,
            mc_samples: 1024,
            scan: 512,
            restarts: 4,
            refine_evals: 150,
            window: 0,
            reference_slack: 0.1,
            gp_starts: 5,
            gp_max_evals: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub objectives: ObjectivesConfig,
    #[serde(default)]
    pub weights: IndexMap<String, WeightBound>,
    pub engine: EngineConfig,
}

/// Default configuration written by `init`, with comments. Must parse to
/// [`RunConfig::default`].
pub const DEFAULT_CONFIG_TOML: &str = r#"# Loss-weight optimisation run.
#
# Every key below is required unless marked optional; unknown keys are rejected.

[problem]
# "restoration" trains a small linear image restorer with a weighted sum of losses.
# "zdt1" and "toy_tradeoff" are analytic test problems (use `dimension` for zdt1).
kind = "restoration"
# "stateful" keeps training one model across evaluations; "fresh" retrains from the
# initial model every time (a stationary black box).
mode = "stateful"
# Synthetic dataset: `image_count` HR images of `image_size`², downsampled by `scale`.
dataset_seed = 7
image_count = 10
image_size = 32
scale = 2
# Odd width of the restoration filter applied after bicubic upsampling.
filter_size = 5
# Gradient-descent steps per evaluation, step size, and gradient-norm clip.
steps = 10
learning_rate = 0.05
grad_clip = 1.0

[objectives]
# Any of: psnr, ssim, lr_psnr, hf_proxy. hf_proxy is a high-frequency error (lower is
# better) standing in for a learned perceptual metric.
names = ["psnr", "hf_proxy"]
orientation = ["maximize", "minimize"]

# One section per loss term, in the order used for weight vectors.
# Loss kinds: l1, l2, fft, gradient, cycle, ssim.
[weights.l1]
low = 0.0
high = 1.0

[weights.l2]
low = 0.0
high = 1.0

[weights.fft]
low = 0.0
high = 0.05

[weights.gradient]
low = 0.0
high = 1.0

[weights.cycle]
low = 0.0
high = 1.0

[weights.ssim]
low = 0.0
high = 1.0

[engine]
# Master seed; every other seed is derived from it.
seed = 2024
# Quasi-random weight vectors evaluated before model-guided proposals.
warm_start_count = 8
# Optional: fixed weights driven `pretrain_epochs` times before the random warm start.
# warm_weights = [0.01, 0.0, 0.0, 1.0, 0.0, 0.0]
pretrain_epochs = 0
# Model-guided iterations after the warm start.
total_iterations = 40
# Monte Carlo samples for EHVI with three or more objectives.
mc_samples = 1024
# Acquisition maximisation: Sobol scan size, refinement restarts, evaluations per restart.
scan = 512
restarts = 4
refine_evals = 150
# Fit surrogates on the most recent `window` observations (0 = all).
window = 0
# Reference point = per-objective minimum minus this fraction of the observed range.
reference_slack = 0.1
# GP hyperparameter search: random starts and likelihood evaluations per start.
gp_starts = 5
gp_max_evals = 300
"#;

impl Default for RunConfig {
    fn default() -> Self {
        let settings = RestorationSettings::default();
        let mut weights = IndexMap::new();
        for (kind, high) in [
            (LossKind::L1, 1.0),
            (LossKind::L2, 1.0),
            (LossKind::Fft, 0.05),
            (LossKind::Gradient, 1.0),
            (LossKind::Cycle, 1.0),
            (LossKind::Ssim, 1.0),
        ] {
            weights.insert(kind.name().to_string(), WeightBound { low: 0.0, high });
        }
        Self {
            problem: ProblemConfig {
                kind: ProblemKind::Restoration,
                dimension: None,
                mode: Some(settings.mode),
                dataset_seed: Some(settings.dataset_seed),
                image_count: Some(settings.image_count),
                image_size: Some(settings.image_size),
                scale: Some(settings.scale),
                filter_size: Some(settings.filter_size),
                steps: Some(settings.steps),
                learning_rate: Some(settings.learning_rate),
                grad_clip: Some(settings.grad_clip),
            },
            objectives: ObjectivesConfig {
                names: vec!["psnr".into(), "hf_proxy".into()],
                orientation: vec![Orientation::Maximize, Orientation::Minimize],
            },
            weights,
            engine: EngineConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// An analytic problem on the unit cube with `x1..xd` weights.
    pub fn analytic(problem: AnalyticProblem, engine: EngineConfig) -> Self {
        let kind = match problem {
            AnalyticProblem::Zdt1 { .. } => ProblemKind::Zdt1,
            AnalyticProblem::ToyTradeoff => ProblemKind::ToyTradeoff,
        };
        let dimension = match problem {
            AnalyticProblem::Zdt1 { dimension } => Some(dimension),
            AnalyticProblem::ToyTradeoff => None,
        };
        Self {
            problem: ProblemConfig::analytic(kind, dimension),
            objectives: ObjectivesConfig {
                names: vec!["f1".into(), "f2".into()],
                orientation: problem.orientation(),
            },
            weights: IndexMap::new(),
            engine,
        }
    }

    /// Weight names and bounds in order. Analytic problems without explicit bounds use the
    /// unit cube.
    pub fn weight_bounds(&self) -> Result<Vec<(String, WeightBound)>> {
        if self.weights.is_empty() {
            if let Some(p) = self.problem.analytic_problem()? {
                return Ok((1..=p.input_dim())
                    .map(|i| (format!("x{i}"), WeightBound { low: 0.0, high: 1.0 }))
                    .collect());
            }
        }
        Ok(self.weights.iter().map(|(k, v)| (k.clone(), *v)).collect())
    }

    pub fn weight_dim(&self) -> usize {
        self.weight_bounds().map_or(0, |b| b.len())
    }

    pub fn objective_dim(&self) -> usize {
        self.objectives.names.len()
    }

    /// Number of observations produced by the fixed-weight pre-training phase.
    pub fn pretrain_count(&self) -> usize {
        if self.engine.warm_weights.is_some() {
            self.engine.pretrain_epochs
        } else {
            0
        }
    }

    pub fn warm_count(&self) -> usize {
        self.pretrain_count() + self.engine.warm_start_count
    }

    pub fn planned_observations(&self) -> usize {
        self.warm_count() + self.engine.total_iterations
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));

        let m = self.objectives.names.len();
        if m < 2 {
            return err(format!("at least 2 objectives are required, got {m}"));
        }
        if self.objectives.orientation.len() != m {
            return err(format!(
                "objectives.orientation has {} entries for {m} names",
                self.objectives.orientation.len()
            ));
        }

        let analytic = self.problem.analytic_problem().map_err(|e| Error::Config(e.to_string()))?;
        match analytic {
            Some(p) => {
                if self.problem.has_restoration_keys() {
                    return err(format!(
                        "restoration keys are not valid for problem kind '{}'",
                        p.name()
                    ));
                }
                if m != p.objective_dim() {
                    return err(format!("{} has {} objectives, got {m}", p.name(), p.objective_dim()));
                }
                if !self.weights.is_empty() && self.weights.len() != p.input_dim() {
                    return err(format!(
                        "{} takes {} inputs but {} weight sections are configured",
                        p.name(),
                        p.input_dim(),
                        self.weights.len()
                    ));
                }
                for (name, b) in &self.weights {
                    if b.low < 0.0 || b.high > 1.0 {
                        return err(format!("weights.{name}: analytic inputs must stay in [0, 1]"));
                    }
                }
            }
            None => {
                if self.problem.dimension.is_some() {
                    return err("problem.dimension is only valid for analytic problems".into());
                }
                for name in &self.objectives.names {
                    MetricKind::from_name(name).map_err(|e| Error::Config(e.to_string()))?;
                }
                if self.weights.is_empty() {
                    return err("restoration needs at least one [weights.<loss>] section".into());
                }
                for name in self.weights.keys() {
                    LossKind::from_name(name).map_err(|e| Error::Config(e.to_string()))?;
                }
                self.problem
                    .restoration()
                    .validate()
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
        }

        for (name, b) in &self.weights {
            if !(b.low.is_finite() && b.high.is_finite()) || b.low < 0.0 || b.high <= b.low {
                return err(format!(
                    "weights.{name}: need 0 <= low < high, got [{}, {}]",
                    b.low, b.high
                ));
            }
        }

        let e = &self.engine;
        let d = self.weight_dim();
        if let Some(w) = &e.warm_weights {
            if w.len() != d {
                return err(format!("engine.warm_weights has {} entries for {d} weights", w.len()));
            }
            let bounds = self.weight_bounds()?;
            for (v, (name, b)) in w.iter().zip(&bounds) {
                if !(b.low..=b.high).contains(v) {
                    return err(format!("engine.warm_weights: {name} = {v} outside [{}, {}]", b.low, b.high));
                }
            }
        } else if e.pretrain_epochs > 0 {
            return err("engine.pretrain_epochs needs engine.warm_weights".into());
        }
        if self.warm_count() < 2 {
            return err(format!(
                "the warm start must produce at least 2 observations for GP fitting, got {}",
                self.warm_count()
            ));
        }
        if e.scan == 0 {
            return err("engine.scan must be positive".into());
        }
        if e.mc_samples == 0 {
            return err("engine.mc_samples must be positive".into());
        }
        if e.gp_starts == 0 || e.gp_max_evals == 0 {
            return err("engine.gp_starts and engine.gp_max_evals must be positive".into());
        }
        if !(e.reference_slack.is_finite() && e.reference_slack >= 0.0) {
            return err(format!("engine.reference_slack must be >= 0, got {}", e.reference_slack));
        }
        if e.window == 1 {
            return err("engine.window must be 0 (all) or at least 2".into());
        }
        Ok(())
    }

    /// Build the evaluator this configuration describes.
    pub fn build_evaluator(&self) -> Result<Box<dyn Evaluator>> {
        self.validate()?;
        match self.problem.analytic_problem()? {
            Some(p) => Ok(Box::new(AnalyticEvaluator::new(p))),
            None => {
                let losses = self
                    .weights
                    .keys()
                    .map(|k| LossKind::from_name(k))
                    .collect::<Result<Vec<_>>>()?;
                let metrics = self
                    .objectives
                    .names
                    .iter()
                    .map(|k| MetricKind::from_name(k))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Box::new(RestorationEvaluator::new(
                    self.problem.restoration(),
                    losses,
                    metrics,
                )?))
            }
        }
    }
}
