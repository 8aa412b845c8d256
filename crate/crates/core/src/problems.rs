//! Analytic bi-objective test problems.
//!
//! Each problem returns raw objective values in its native orientation together with
//! that orientation, so callers canonicalise exactly as they do for real evaluators.

use serde::{Deserialize, Serialize};

use crate::engine::{Evaluator, Orientation};
use crate::error::{Error, Result};
use crate::pareto::ObjectiveVector;

pub const ZDT1_DEFAULT_DIMENSION: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticProblem {
    /// `d`-dimensional ZDT1, both objectives minimised.
    Zdt1 { dimension: usize },
    /// `f1 = x`, `f2 = 1 − x²`, both maximised.
    ToyTradeoff,
}

impl AnalyticProblem {
    pub fn by_name(name: &str, dimension: Option<usize>) -> Result<Self> {
        match name {
            "zdt1" => {
                let dimension = dimension.unwrap_or(ZDT1_DEFAULT_DIMENSION);
                if dimension < 2 {
                    return Err(Error::invalid("zdt1 needs dimension >= 2"));
                }
                Ok(Self::Zdt1 { dimension })
            }
            "toy_tradeoff" => match dimension {
                None | Some(1) => Ok(Self::ToyTradeoff),
                Some(d) => Err(Error::invalid(format!("toy_tradeoff is 1-dimensional, got {d}"))),
            },
            other => Err(Error::invalid(format!("unknown analytic problem '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zdt1 { .. } => "zdt1",
            Self::ToyTradeoff => "toy_tradeoff",
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Self::Zdt1 { dimension } => *dimension,
            Self::ToyTradeoff => 1,
        }
    }

    pub fn objective_dim(&self) -> usize {
        2
    }

    pub fn orientation(&self) -> Vec<Orientation> {
        match self {
            Self::Zdt1 { .. } => vec![Orientation::Minimize; 2],
            Self::ToyTradeoff => vec![Orientation::Maximize; 2],
        }
    }

    /// Raw objective values in the native orientation.
    pub fn evaluate_raw(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: x.len() });
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!("{} input outside the unit cube: {x:?}", self.name())));
        }
        Ok(match self {
            Self::Zdt1 { .. } => {
                let f1 = x[0];
                let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
                vec![f1, g * (1.0 - (f1 / g).sqrt())]
            }
            Self::ToyTradeoff => vec![x[0], 1.0 - x[0] * x[0]],
        })
    }

    /// Canonical (maximise-all) objective vector.
    pub fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector> {
        let raw = self.evaluate_raw(x)?;
        ObjectiveVector::new(Orientation::canonicalize(&self.orientation(), &raw))
    }

    /// `n` evenly spaced points of the true front, raw orientation.
    pub fn true_front(&self, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                match self {
                    Self::Zdt1 { .. } => vec![t, 1.0 - t.sqrt()],
                    Self::ToyTradeoff => vec![t, 1.0 - t * t],
                }
            })
            .collect()
    }
}

/// ZDT1 in canonical orientation: `(−f1, −f2)`.
pub fn zdt1(x: &[f64]) -> Result<ObjectiveVector> {
    if x.len() < 2 {
        return Err(Error::invalid("zdt1 needs at least 2 inputs"));
    }
    AnalyticProblem::Zdt1 { dimension: x.len() }.evaluate(x)
}

/// Toy concave trade-off in canonical orientation: `(x, 1 − x²)`.
pub fn toy_tradeoff(x: f64) -> Result<ObjectiveVector> {
    AnalyticProblem::ToyTradeoff.evaluate(&[x])
}

/// Stateless evaluator over an analytic problem; weights are the problem inputs.
#[derive(Debug, Clone)]
pub struct AnalyticEvaluator {
    problem: AnalyticProblem,
}

impl AnalyticEvaluator {
    pub fn new(problem: AnalyticProblem) -> Self {
        Self { problem }
    }

    pub fn problem(&self) -> AnalyticProblem {
        self.problem
    }
}

impl Evaluator for AnalyticEvaluator {
    fn objective_count(&self) -> usize {
        self.problem.objective_dim()
    }

    fn train_and_eval(&mut self, weights: &[f64]) -> Result<Vec<f64>> {
        self.problem.evaluate_raw(weights)
    }
}
