//! Quick analytic validation suite for `mobo bench`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Result;

use mobo_core::acquisition::{ehvi_exact_2d, ehvi_monte_carlo, AcquisitionContext};
use mobo_core::engine::config::EngineConfig;
use mobo_core::engine::{reference_point, warm_sample, Optimizer, RunConfig};
use mobo_core::gp::{GpHyperparameters, GpModel};
use mobo_core::pareto::{extract_front, hypervolume, ObjectiveVector, ParetoFront, ReferencePoint};
use mobo_core::problems::{AnalyticEvaluator, AnalyticProblem};
use mobo_core::stats::mix_seed;

/// Deterministic uniform draws in [0, 1).
struct Stream {
    seed: u64,
    counter: u64,
}

impl Stream {
    fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    fn next(&mut self) -> f64 {
        self.counter += 1;
        (mix_seed(self.seed, self.counter) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.next() * n as f64) as usize).min(n - 1)
    }

    fn point(&mut self, d: usize) -> Vec<f64> {
        (0..d).map(|_| self.next()).collect()
    }
}

fn ov(v: Vec<f64>) -> Result<ObjectiveVector> {
    Ok(ObjectiveVector::new(v)?)
}

fn hv_worked_example() -> Result<(bool, String)> {
    let pts = [vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
    let vs: Vec<ObjectiveVector> = pts.iter().map(|p| ov(p.clone())).collect::<Result<_>>()?;
    let r = ReferencePoint::new(vec![0.0, 0.0])?;
    let hv = hypervolume(&extract_front(&vs)?, &r)?;
    let mut with = vs.clone();
    with.push(ov(vec![4.0, 4.0])?);
    let hvi = hypervolume(&extract_front(&with)?, &r)? - hv;
    Ok((hv == 6.0 && hvi == 10.0, format!("HV = {hv}, HVI of (4, 4) = {hvi}")))
}

/// Midpoint-rule area of the dominated region on an `n × n` grid.
fn grid_area(front: &ParetoFront, r: &[f64], n: usize) -> f64 {
    let pts: Vec<&[f64]> = front.points().iter().map(|p| p.values()).collect();
    let hi: Vec<f64> = (0..2).map(|k| pts.iter().map(|p| p[k]).fold(r[k], f64::max)).collect();
    let (hx, hy) = ((hi[0] - r[0]) / n as f64, (hi[1] - r[1]) / n as f64);
    let mut count = 0usize;
    for i in 0..n {
        let x = r[0] + (i as f64 + 0.5) * hx;
        for j in 0..n {
            let y = r[1] + (j as f64 + 0.5) * hy;
            if pts.iter().any(|p| p[0] >= x && p[1] >= y) {
                count += 1;
            }
        }
    }
    count as f64 * hx * hy
}

fn hv_grid_oracle() -> Result<(bool, String)> {
    let mut s = Stream::new(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = 1 + s.below(10);
        let pts: Vec<ObjectiveVector> = (0..n).map(|_| ov(s.point(2))).collect::<Result<_>>()?;
        let front = extract_front(&pts)?;
        let r = [-0.1, -0.1];
        let exact = hypervolume(&front, &ReferencePoint::new(r.to_vec())?)?;
        let grid = grid_area(&front, &r, 800);
        worst = worst.max((exact - grid).abs() / exact);
    }
    Ok((worst < 0.01, format!("max relative error {worst:.2e} over 100 random 2-D fronts")))
}

fn gp_interpolation() -> Result<(bool, String)> {
    let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 5.0]).collect();
    let ys = vec![0.3, -1.2, 0.8, 1.5, -0.4, -1.0];
    let h = GpHyperparameters::new(vec![0.15], 1.0, 1e-6, 0.0)?;
    let gp = GpModel::condition(xs.clone(), ys.clone(), h, 1e-6)?;
    let mut worst: f64 = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        worst = worst.max((gp.predict(x)?.mean - y).abs());
    }
    Ok((worst < 1e-3, format!("max residual at training inputs {worst:.2e}")))
}

fn ehvi_cross_check() -> Result<(bool, String)> {
    let mut s = Stream::new(23);
    let mut worst: f64 = 0.0;
    for case in 0..10u64 {
        let n = 4 + s.below(5);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| s.point(2)).collect();
        let objs: Vec<Vec<f64>> = (0..n).map(|_| vec![s.range(-1.0, 1.0), s.range(-1.0, 1.0)]).collect();
        let mut models = Vec::new();
        for j in 0..2 {
            let ys = objs.iter().map(|o| o[j]).collect();
            let h = GpHyperparameters::new(vec![0.4, 0.4], 1.0, 1e-3, 0.0)?;
            models.push(GpModel::condition(xs.clone(), ys, h, 1e-6)?);
        }
        let pts: Vec<ObjectiveVector> = objs.into_iter().map(ov).collect::<Result<_>>()?;
        let ctx = AcquisitionContext {
            models,
            front: extract_front(&pts)?,
            reference: reference_point(&pts, 0.1)?,
            mc_samples: 1 << 16,
            seed: 500 + case,
        };
        let mut x = s.point(2);
        for _ in 0..200 {
            if ehvi_exact_2d(&ctx, &x)? > 1e-6 {
                break;
            }
            x = s.point(2);
        }
        let exact = ehvi_exact_2d(&ctx, &x)?;
        let (mc, se) = ehvi_monte_carlo(&ctx, &x)?;
        let z = if se > 0.0 { (exact - mc).abs() / se } else if exact == mc { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
    }
    Ok((worst <= 3.0, format!("max |exact − MC| = {worst:.2} standard errors over 10 contexts")))
}

fn zdt1_against_random() -> Result<(bool, String)> {
    let r = ReferencePoint::new(vec![-1.1, -11.0])?;
    let seeds = [1u64, 2, 3];
    let mut wins = 0;
    for &seed in &seeds {
        let engine = EngineConfig {
            seed,
            warm_start_count: 8,
            total_iterations: 16,
            ..EngineConfig::default()
        };
        let problem = AnalyticProblem::Zdt1 { dimension: 4 };
        let config = RunConfig::analytic(problem, engine);
        let mut opt = Optimizer::new(config.clone(), AnalyticEvaluator::new(problem))?;
        let bo = hypervolume(&extract_front(opt.run()?.canonical())?, &r)?;
        let random: Vec<ObjectiveVector> = (0..config.planned_observations())
            .map(|i| Ok(problem.evaluate(&warm_sample(&config, i)?)?))
            .collect::<Result<_>>()?;
        let base = hypervolume(&extract_front(&random)?, &r)?;
        if bo > base {
            wins += 1;
        }
    }
    Ok((wins >= 2, format!("optimiser beat random sampling on {wins} of {} seeds (zdt1, d = 4, 8 + 16)", seeds.len())))
}

fn toy_run() -> Result<(bool, String)> {
    let start = Instant::now();
    let engine = EngineConfig { warm_start_count: 10, total_iterations: 20, ..EngineConfig::default() };
    let config = RunConfig::analytic(AnalyticProblem::ToyTradeoff, engine);
    let mut opt = Optimizer::new(config, AnalyticEvaluator::new(AnalyticProblem::ToyTradeoff))?;
    let archive = opt.run()?;
    let front = archive.front_indices().len();
    let elapsed = start.elapsed();
    Ok((
        front >= 3 && elapsed < Duration::from_secs(60),
        format!("toy_tradeoff 10 + 20: front size {front}, {elapsed:.1?} (limit 60s)"),
    ))
}

type Check = fn() -> Result<(bool, String)>;

pub fn run() -> Result<ExitCode> {
    let checks: [(&str, Check); 6] = [
        ("hv_worked_example", hv_worked_example),
        ("hv_grid_oracle", hv_grid_oracle),
        ("gp_interpolation", gp_interpolation),
        ("ehvi_cross_check", ehvi_cross_check),
        ("zdt1_against_random", zdt1_against_random),
        ("toy_tradeoff_run", toy_run),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e:#}")));
        if !pass {
            failed += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
