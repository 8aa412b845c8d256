use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use mobo_core::engine::{read_archive, Observation, RunConfig};
use mobo_core::pareto::{front_indices, ObjectiveVector};

fn mobo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mobo")).args(args).output().expect("spawn mobo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TOY_CONFIG: &str = r#"
[problem]
kind = "toy_tradeoff"

[objectives]
names = ["x", "one_minus_x2"]
orientation = ["maximize", "maximize"]

[engine]
seed = 5
warm_start_count = 10
total_iterations = 20
mc_samples = 256
scan = 256
restarts = 3
refine_evals = 80
reference_slack = 0.1
gp_starts = 3
gp_max_evals = 150
"#;

const ZDT1_CONFIG: &str = r#"
[problem]
kind = "zdt1"
dimension = 3

[objectives]
names = ["f1", "f2"]
orientation = ["minimize", "minimize"]

[engine]
seed = 17
warm_start_count = 5
total_iterations = 7
mc_samples = 256
scan = 128
restarts = 2
refine_evals = 60
reference_slack = 0.1
gp_starts = 2
gp_max_evals = 100
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run_to_end(config: &Path, archive: &Path) -> Output {
    let out = mobo(&["run", "--config", s(config), "--archive", s(archive)]);
    assert!(out.status.success(), "run failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Archive lines with the wall-clock fields zeroed.
fn timeless_lines(archive: &Path) -> Vec<String> {
    read_archive(archive)
        .unwrap()
        .observations
        .into_iter()
        .map(|mut o| {
            o.eval_wall_seconds = 0.0;
            o.fit_wall_seconds = 0.0;
            o.propose_wall_seconds = 0.0;
            o.to_json_line().unwrap()
        })
        .collect()
}

fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn init_refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mobo.toml");
    assert!(mobo(&["init", s(&path)]).status.success());
    std::fs::write(&path, "edited").unwrap();
    let second = mobo(&["init", s(&path)]);
    assert!(!second.status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "edited");
    assert!(mobo(&["init", s(&path), "--force"]).status.success());
    assert_ne!(std::fs::read_to_string(&path).unwrap(), "edited");
}

#[test]
fn init_writes_the_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mobo.toml");
    assert!(mobo(&["init", s(&path)]).status.success());
    assert_eq!(RunConfig::load(&path).unwrap(), RunConfig::default());
}

#[test]
fn toy_run_prints_iterations_and_finishes_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TOY_CONFIG);
    let archive = dir.path().join("toy.ndjson");
    let start = Instant::now();
    let out = run_to_end(&config, &archive);
    assert!(start.elapsed() < Duration::from_secs(60), "took {:?}", start.elapsed());

    let text = stdout(&out);
    let iter_lines: Vec<&str> = text.lines().filter(|l| l.starts_with("iter ")).collect();
    assert_eq!(iter_lines.len(), 30);
    for field in ["weights=", "objectives=", "front=", "hv=", "eval=", "fit=", "propose="] {
        assert!(iter_lines.iter().all(|l| l.contains(field)), "missing {field}");
    }
    assert!(text.contains("run complete: 30 of 30 observations"));
    assert_eq!(read_archive(&archive).unwrap().observations.len(), 30);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("toy.ndjson.manifest.json")).unwrap())
            .unwrap();
    for key in ["config_path", "archive_path", "created", "engine_version"] {
        assert!(manifest.get(key).is_some(), "manifest lacks {key}");
    }

    // A finished archive is not restarted.
    assert!(!mobo(&["run", "--config", s(&config), "--archive", s(&archive)]).status.success());
}

#[test]
fn pareto_csv_matches_a_rescan_of_the_archive() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), ZDT1_CONFIG);
    let archive = dir.path().join("z.ndjson");
    run_to_end(&config, &archive);

    let out = mobo(&["pareto", "--archive", s(&archive), "--csv"]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out));
    assert_eq!(rows[0], ["iteration", "x1", "x2", "x3", "f1", "f2"]);
    assert!(rows.iter().all(|r| r.len() == 1 + 3 + 2));

    // Independent re-scan: minimised objectives negated, then front membership.
    let obs: Vec<Observation> = read_archive(&archive).unwrap().observations;
    let canonical: Vec<ObjectiveVector> = obs
        .iter()
        .map(|o| ObjectiveVector::new(o.objectives_raw.iter().map(|v| -v).collect()).unwrap())
        .collect();
    let mut expected: Vec<&Observation> = front_indices(&canonical).unwrap().iter().map(|&i| &obs[i]).collect();
    expected.sort_by(|a, b| b.objectives_raw[0].total_cmp(&a.objectives_raw[0]));

    let body = &rows[1..];
    assert_eq!(body.len(), expected.len());
    for (row, o) in body.iter().zip(expected) {
        assert_eq!(row[0].parse::<usize>().unwrap(), o.iteration);
        let values: Vec<f64> = row[1..].iter().map(|v| v.parse().unwrap()).collect();
        assert_eq!(&values[..3], &o.weights[..]);
        assert_eq!(&values[3..], &o.objectives_raw[..]);
    }
    let first: Vec<f64> = body.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(first.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn pareto_of_a_single_observation() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), ZDT1_CONFIG);
    let archive = dir.path().join("one.ndjson");
    let out = mobo(&["run", "--config", s(&config), "--archive", s(&archive), "--max-observations", "1"]);
    assert!(out.status.success());
    let out = mobo(&["pareto", "--archive", s(&archive), "--csv"]);
    let rows = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "0");
}

#[test]
fn corrupt_lines_are_reported_and_valid_records_still_listed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), ZDT1_CONFIG);
    let archive = dir.path().join("c.ndjson");
    run_to_end(&config, &archive);
    let mut lines: Vec<String> =
        std::fs::read_to_string(&archive).unwrap().lines().map(str::to_string).collect();
    lines.insert(2, "{not json".into());
    std::fs::write(&archive, lines.join("\n") + "\n").unwrap();

    for cmd in ["pareto", "report"] {
        let out = mobo(&[cmd, "--archive", s(&archive), "--config", s(&config)]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(":3: corrupt record"), "{cmd}: {err}");
        assert!(!stdout(&out).is_empty());
    }
}

#[test]
fn report_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), ZDT1_CONFIG);
    let archive = dir.path().join("r.ndjson");
    run_to_end(&config, &archive);

    let out = mobo(&["report", "--archive", s(&archive)]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out));
    assert_eq!(
        rows[0],
        [
            "iteration",
            "phase",
            "eval_seconds",
            "fit_seconds",
            "propose_seconds",
            "cumulative_eval_seconds",
            "cumulative_model_seconds",
            "front_size",
            "hypervolume"
        ]
    );
    assert_eq!(rows.len(), 1 + 12);
    let col = |k: usize| -> Vec<f64> { rows[1..].iter().map(|r| r[k].parse().unwrap()).collect() };
    for k in [5, 6, 8] {
        let v = col(k);
        assert!(v.windows(2).all(|w| w[1] >= w[0]), "column {} decreases: {v:?}", rows[0][k]);
    }
    assert_eq!(rows[1][1], "warm-start");
    assert_eq!(rows[12][1], "optimized");
}

#[test]
fn killed_run_resumes_to_the_same_archive() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), ZDT1_CONFIG);
    let full = dir.path().join("full.ndjson");
    run_to_end(&config, &full);

    let cut = dir.path().join("cut.ndjson");
    let out = mobo(&["run", "--config", s(&config), "--archive", s(&cut), "--max-observations", "7"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("run stopped: 7 of 12"));
    // Simulate a crash in the middle of a write.
    let mut text = std::fs::read_to_string(&cut).unwrap();
    text.push_str("{\"version\":1,\"iter");
    std::fs::write(&cut, text).unwrap();

    let out = mobo(&["resume", "--config", s(&config), "--archive", s(&cut)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("resuming"));
    assert_eq!(timeless_lines(&cut), timeless_lines(&full));
}

#[test]
fn help_documents_csv_schemas() {
    let out = mobo(&["pareto", "--help"]);
    assert!(stdout(&out).contains("iteration,<weight names...>,<objective names...>"));
    let out = mobo(&["report", "--help"]);
    assert!(stdout(&out).contains("cumulative_model_seconds"));
}

#[test]
fn init_then_run_on_the_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("mobo.toml");
    let archive = dir.path().join("default.ndjson");
    assert!(mobo(&["init", s(&config)]).status.success());
    run_to_end(&config, &archive);
    let out = mobo(&["pareto", "--archive", s(&archive), "--csv"]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out));
    assert_eq!(rows[0][0], "iteration");
    assert_eq!(&rows[0][7..], ["psnr", "hf_proxy"]);
    assert!(rows.len() - 1 >= 3, "front size {}", rows.len() - 1);
}
