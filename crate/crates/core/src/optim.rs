//! Bounded derivative-free local search.
//!
//! A compass search with an accelerating pattern move (Hooke–Jeeves style). Used both for
//! GP hyperparameter fitting in log space and for refining acquisition maxima.

/// Settings for [`PatternSearch::maximize`]. Steps are fractions of each bound's width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSearch {
    pub initial_step: f64,
    pub min_step: f64,
    pub shrink: f64,
    pub max_evals: usize,
}

impl Default for PatternSearch {
    fn default() -> Self {
        Self { initial_step: 0.25, min_step: 1e-4, shrink: 0.5, max_evals: 500 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl PatternSearch {
    /// Maximise `f` inside the box `[lower, upper]` starting from `x0` (clamped into the box).
    /// Non-finite objective values are treated as `-∞`.
    pub fn maximize<F>(&self, mut f: F, x0: &[f64], lower: &[f64], upper: &[f64]) -> SearchResult
    where
        F: FnMut(&[f64]) -> f64,
    {
        let d = x0.len();
        assert_eq!(lower.len(), d);
        assert_eq!(upper.len(), d);
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        };

        let mut evals = 0;
        let mut x: Vec<f64> = (0..d).map(|j| x0[j].clamp(lower[j], upper[j])).collect();
        let mut best = eval(&x, &mut evals);
        let mut step = self.initial_step;

        while step >= self.min_step && evals < self.max_evals {
            let base = x.clone();
            let mut improved = false;
            for j in 0..d {
                let width = upper[j] - lower[j];
                for dir in [1.0, -1.0] {
                    if evals >= self.max_evals {
                        break;
                    }
                    let cand = (x[j] + dir * step * width).clamp(lower[j], upper[j]);
                    if cand == x[j] {
                        continue;
                    }
                    let old = x[j];
                    x[j] = cand;
                    let v = eval(&x, &mut evals);
                    if v > best {
                        best = v;
                        improved = true;
                        break;
                    }
                    x[j] = old;
                }
            }
            if !improved {
                step *= self.shrink;
                continue;
            }
            // Pattern move: try continuing in the direction just taken.
            if evals < self.max_evals {
                let probe: Vec<f64> = (0..d)
                    .map(|j| (2.0 * x[j] - base[j]).clamp(lower[j], upper[j]))
                    .collect();
                if probe != x {
                    let v = eval(&probe, &mut evals);
                    if v > best {
                        best = v;
                        x = probe;
                    }
                }
            }
        }
        SearchResult { x, value: best, evals }
    }
}
