//! Subcommands other than `bench`.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use mobo_core::engine::{
    hypervolume_trace, read_archive, reference_point, ArchiveContents, Observation, Optimizer,
    Orientation, ParetoArchive, Phase, RunConfig, StepReport, DEFAULT_CONFIG_TOML,
};

/// Exit code when an archive has corrupt lines.
const CORRUPT_EXIT: u8 = 2;
const DEFAULT_REFERENCE_SLACK: f64 = 0.1;

/// Written next to the archive as `<archive>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub archive_path: PathBuf,
    pub created: String,
    pub engine_version: String,
}

pub fn manifest_path(archive: &Path) -> PathBuf {
    let mut name = archive.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn read_manifest(archive: &Path) -> Option<RunManifest> {
    let text = std::fs::read_to_string(manifest_path(archive)).ok()?;
    serde_json::from_str(&text).ok()
}

fn write_manifest(config: &Path, archive: &Path) -> Result<()> {
    let absolute = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let manifest = RunManifest {
        config_path: absolute(config),
        archive_path: absolute(archive),
        created: chrono::Utc::now().to_rfc3339(),
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let path = manifest_path(archive);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

pub fn init(path: &Path, force: bool) -> Result<ExitCode> {
    let mut opts = OpenOptions::new();
    opts.write(true);
    if force {
        opts.create(true).truncate(true);
    } else {
        opts.create_new(true);
    }
    let mut file = match opts.open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
            bail!("{} already exists; pass --force to overwrite", path.display())
        }
        Err(e) => return Err(e).with_context(|| format!("creating {}", path.display())),
    };
    file.write_all(DEFAULT_CONFIG_TOML.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn print_step(report: &StepReport) {
    let o = &report.observation;
    let phase = match o.phase {
        Phase::WarmStart => "warm",
        Phase::Optimized => "mobo",
    };
    println!(
        "iter {:>4} {phase} weights={} objectives={} front={} hv={:.6} eval={:.3}s fit={:.3}s propose={:.3}s",
        o.iteration,
        fmt_vec(&o.weights),
        fmt_vec(&o.objectives_raw),
        report.front_size,
        report.hypervolume,
        o.eval_wall_seconds,
        o.fit_wall_seconds,
        o.propose_wall_seconds,
    );
    if let Some(r) = &report.reference {
        log::debug!("reference point (canonical) {}", fmt_vec(r));
    }
    if let Some(p) = &report.proposal {
        log::debug!(
            "acquisition {:?} value {:.3e}{}",
            p.method,
            p.acquisition_value,
            if p.exploration_fallback { " (exploration fallback)" } else { "" }
        );
    }
}

pub fn run(config_path: &Path, archive: &Path, max_obs: Option<usize>, resume: bool) -> Result<ExitCode> {
    let config = RunConfig::load(config_path)?;
    let evaluator = config.build_evaluator()?;
    let mut optimizer = if resume {
        let opt = Optimizer::resume(config.clone(), evaluator, archive)?;
        if read_manifest(archive).is_none() {
            write_manifest(config_path, archive)?;
        }
        println!("resuming {} at observation {}", archive.display(), opt.archive().len());
        opt
    } else {
        let opt = Optimizer::create(config.clone(), evaluator, archive)?;
        write_manifest(config_path, archive)?;
        opt
    };
    optimizer.run_until(max_obs.unwrap_or(usize::MAX), print_step)?;

    let archive_state = optimizer.archive();
    let planned = config.planned_observations();
    let status = if optimizer.is_done() { "complete" } else { "stopped" };
    println!(
        "run {status}: {} of {planned} observations, front size {}",
        archive_state.len(),
        archive_state.front_indices().len()
    );
    print_front_table(&config_names(Some(&config), archive_state), archive_state);
    Ok(ExitCode::SUCCESS)
}

/// Weight and objective names for output columns.
struct Names {
    weights: Vec<String>,
    objectives: Vec<String>,
}

fn config_names(config: Option<&RunConfig>, archive: &ParetoArchive) -> Names {
    let first = archive.observations().first();
    let d = first.map_or(0, |o| o.weights.len());
    let m = first.map_or(0, |o| o.objectives_raw.len());
    if let Some(c) = config {
        let weights: Vec<String> = c.weight_bounds().unwrap_or_default().into_iter().map(|(n, _)| n).collect();
        if (weights.len() == d || first.is_none()) && (c.objective_dim() == m || first.is_none()) {
            return Names { weights, objectives: c.objectives.names.clone() };
        }
        log::warn!("config does not match the archive dimensions; using generic column names");
    }
    Names {
        weights: (1..=d).map(|i| format!("w{i}")).collect(),
        objectives: (1..=m).map(|i| format!("o{i}")).collect(),
    }
}

/// Config from `--config`, else the one recorded in the archive's manifest.
fn optional_config(archive: &Path, config: Option<&Path>) -> Result<Option<RunConfig>> {
    if let Some(p) = config {
        return Ok(Some(RunConfig::load(p)?));
    }
    let Some(manifest) = read_manifest(archive) else {
        return Ok(None);
    };
    match RunConfig::load(&manifest.config_path) {
        Ok(c) => Ok(Some(c)),
        Err(e) => {
            log::warn!("manifest config unavailable: {e}");
            Ok(None)
        }
    }
}

/// Valid records plus a count of the corrupt ones, which are reported on stderr.
fn load_records(archive: &Path) -> Result<(ParetoArchive, usize)> {
    let ArchiveContents { observations, errors, .. } =
        read_archive(archive).with_context(|| format!("reading {}", archive.display()))?;
    for e in &errors {
        eprintln!("{}:{}: corrupt record: {}", archive.display(), e.line, e.message);
    }
    if let Some(first) = observations.first() {
        let (d, m) = (first.weights.len(), first.objectives_raw.len());
        if let Some(bad) = observations.iter().find(|o| o.weights.len() != d || o.objectives_raw.len() != m) {
            bail!("record for iteration {} has inconsistent dimensions", bad.iteration);
        }
    }
    let mut pareto = ParetoArchive::new();
    for obs in observations {
        pareto.push(obs)?;
    }
    Ok((pareto, errors.len()))
}

/// Front observations sorted by the first raw objective descending, ties by iteration.
fn sorted_front(archive: &ParetoArchive) -> Vec<&Observation> {
    let obs = archive.observations();
    let mut front: Vec<&Observation> = archive.front_indices().iter().map(|&i| &obs[i]).collect();
    front.sort_by(|a, b| {
        b.objectives_raw[0].total_cmp(&a.objectives_raw[0]).then(a.iteration.cmp(&b.iteration))
    });
    front
}

fn print_front_table(names: &Names, archive: &ParetoArchive) {
    let Some(first) = archive.observations().first() else {
        println!("(empty archive)");
        return;
    };
    let labels: Vec<String> = names
        .objectives
        .iter()
        .zip(&first.orientation)
        .map(|(n, o)| match o {
            Orientation::Maximize => format!("{n}(max)"),
            Orientation::Minimize => format!("{n}(min)"),
        })
        .collect();
    println!("{:>9}  {:<40}  {}", "iteration", "objectives", "weights");
    println!("{:>9}  {:<40}  {}", "", labels.join(" "), names.weights.join(" "));
    for o in sorted_front(archive) {
        println!("{:>9}  {:<40}  {}", o.iteration, fmt_vec(&o.objectives_raw), fmt_vec(&o.weights));
    }
}

fn csv_row(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(",")
}

/// Floats are written with the shortest representation that round-trips.
fn csv_float(v: f64) -> String {
    format!("{v:?}")
}

fn exit_for(corrupt: usize) -> ExitCode {
    if corrupt > 0 {
        ExitCode::from(CORRUPT_EXIT)
    } else {
        ExitCode::SUCCESS
    }
}

pub fn pareto(archive: &Path, config: Option<&Path>, csv: bool) -> Result<ExitCode> {
    let config = optional_config(archive, config)?;
    let (records, corrupt) = load_records(archive)?;
    let names = config_names(config.as_ref(), &records);
    if csv {
        let header = std::iter::once("iteration".to_string())
            .chain(names.weights.iter().cloned())
            .chain(names.objectives.iter().cloned());
        println!("{}", csv_row(header));
        for o in sorted_front(&records) {
            let row = std::iter::once(o.iteration.to_string())
                .chain(o.weights.iter().map(|v| csv_float(*v)))
                .chain(o.objectives_raw.iter().map(|v| csv_float(*v)));
            println!("{}", csv_row(row));
        }
    } else {
        println!("{} observations, front size {}", records.len(), records.front_indices().len());
        print_front_table(&names, &records);
    }
    Ok(exit_for(corrupt))
}

pub fn report(archive: &Path, config: Option<&Path>) -> Result<ExitCode> {
    let config = optional_config(archive, config)?;
    let (records, corrupt) = load_records(archive)?;
    let slack = config.as_ref().map_or(DEFAULT_REFERENCE_SLACK, |c| c.engine.reference_slack);
    let obs = records.observations();
    let trace = hypervolume_trace(obs, slack)?;

    if !obs.is_empty() {
        let r = reference_point(records.canonical(), slack)?;
        eprintln!("reference point (maximise-all orientation): {}", fmt_vec(r.values()));
    }
    if let Some(c) = &config {
        let pretrain = c.pretrain_count();
        if pretrain > 0 {
            let fitted = if c.engine.window == 0 { "included in" } else { "subject to the window for" };
            eprintln!(
                "note: the first {pretrain} warm-start observations are fixed-weight pre-training \
                 and are {fitted} surrogate fitting (window = {})",
                c.engine.window
            );
        }
    }

    println!(
        "iteration,phase,eval_seconds,fit_seconds,propose_seconds,cumulative_eval_seconds,\
         cumulative_model_seconds,front_size,hypervolume"
    );
    let mut incremental = ParetoArchive::new();
    let (mut cum_eval, mut cum_model) = (0.0, 0.0);
    for (o, hv) in obs.iter().zip(&trace) {
        incremental.push(o.clone())?;
        cum_eval += o.eval_wall_seconds;
        cum_model += o.fit_wall_seconds + o.propose_wall_seconds;
        let phase = match o.phase {
            Phase::WarmStart => "warm-start",
            Phase::Optimized => "optimized",
        };
        println!(
            "{}",
            csv_row([
                o.iteration.to_string(),
                phase.to_string(),
                csv_float(o.eval_wall_seconds),
                csv_float(o.fit_wall_seconds),
                csv_float(o.propose_wall_seconds),
                csv_float(cum_eval),
                csv_float(cum_model),
                incremental.front_indices().len().to_string(),
                csv_float(*hv),
            ])
        );
    }
    Ok(exit_for(corrupt))
}
