use std::fs;
use std::path::Path;
use std::process::Command;

use xlayer::cli::{self, ExperimentConfig, Overrides, ScenarioOutcome, TaskConfig};
use xlayer::controller::{build_task, coordinate, detect_goal, Plan, TaskSelection, Weighting};
use xlayer::moo_core::{run_conflict_resolving, RunConfig, WeightUpdate};
use xlayer::objectives::{QuadraticAgent, QuadraticOracle};

fn config_in(dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.apply(&Overrides { out_dir: Some(dir.to_path_buf()), iterations: Some(200), ..Default::default() })
        .unwrap();
    cfg
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_traces_writes_seven_identical_files_into_a_new_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_in(&tmp.path().join("nested/out"));
    let written = cli::simulate_traces(&cfg).unwrap();
    let csvs = written.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).count();
    assert_eq!(csvs, 7);
    let dir = cfg.output_root().join("traces");
    let first = read_dir_sorted(&dir);
    cli::simulate_traces(&cfg).unwrap();
    assert_eq!(first, read_dir_sorted(&dir));
}

#[test]
fn scenario_without_goal_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let outcome = cli::scenario(&config_in(tmp.path()), "hello").unwrap();
    assert!(matches!(outcome, ScenarioOutcome::NoGoal));
}

#[test]
fn scenario_metric_stream_matches_a_standalone_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_in(tmp.path());
    let registry = cfg.registry().unwrap();
    let goal = detect_goal("increase video resolution", &cfg.intents).unwrap();
    let plan = Plan::new(goal, &cfg.separation_table(), &registry).unwrap();
    let env = cli::environment(&cfg).unwrap();
    let coord = cfg.optimizer.coordination(Weighting::Dynamic(WeightUpdate::Matrix));
    let log = coordinate(&plan, &registry, &env, &TaskSelection::CrossLayer, &coord, 5).unwrap();

    let task = build_task(&plan, &registry, &env, &coord, 5).unwrap();
    let run = RunConfig::new(coord.schedule, coord.iterations, 5).with_g_error_every(coord.g_error_every);
    let standalone = run_conflict_resolving(&task, &run).unwrap();
    assert_eq!(log.records, standalone.records);
    assert_eq!(log.records.len(), 200);
}

#[test]
fn compare_on_identical_objectives_gives_ratio_one() {
    let settings = cli::OptimizerSettings { iterations: 300, seeds: vec![0, 1, 2], g_error_every: 0, ..Default::default() };
    let agent = QuadraticAgent::isotropic(1.0, vec![0.5, -0.5]);
    let runs = cli::compare_runs(|seed| QuadraticOracle::identical(3, agent.clone(), 10.0, 100, 0.2, seed), &settings)
        .unwrap();
    let report = cli::compare_report("identical", 300, &runs);
    assert_eq!(report.ratio, 1.0);
    assert_eq!(report.dynamic_c_error.len(), 300);
    assert_eq!(report.static_c_error.len(), 300);
}

#[test]
fn compare_writes_only_the_runs_it_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config_in(tmp.path());
    cfg.optimizer.seeds = vec![3, 4];
    let report = cli::compare(&cfg).unwrap();
    let dir = tmp.path().join("compare");
    let mut run_dirs: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let e = e.unwrap();
            e.file_type().unwrap().is_dir().then(|| e.file_name().to_string_lossy().into_owned())
        })
        .collect();
    run_dirs.sort();
    let mut listed = report.runs.clone();
    listed.sort();
    assert_eq!(run_dirs, listed);
    for run in &report.runs {
        let text = fs::read_to_string(dir.join(run).join("metrics.jsonl")).unwrap();
        let records: Vec<cli::MetricsRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(records.len(), 200);
        assert!(records.iter().all(|r| r.run_id == *run && r.c_error.is_finite()));
    }
    let csv = fs::read_to_string(dir.join("c_error.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
    assert!(dir.join("report.json").is_file() && dir.join("tradeoff.csv").is_file());

    cfg.optimizer.seeds = vec![3];
    assert!(cli::compare(&cfg).is_err());
}

#[test]
fn verify_bounds_rejects_the_simulation_task() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config_in(tmp.path());
    cfg.task = TaskConfig::CrosslayerSim;
    let err = cli::verify_bounds(&cfg).unwrap_err();
    assert_eq!(cli::Status::for_error(&err), cli::Status::ConfigError);
}

#[test]
fn config_errors_carry_location() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    fs::write(&path, "{\n  \"optimizer\": {\n    \"iterations\": 5,\n    \"bogus\": 1\n  }\n}\n").unwrap();
    let msg = ExperimentConfig::load(&path).unwrap_err().to_string();
    assert!(msg.contains("bad.json:4:"), "{msg}");

    fs::write(&path, r#"{"agents": "missing-cards.json"}"#).unwrap();
    assert!(ExperimentConfig::load(&path).is_err());
}

fn xlayer(args: &[&str], out: &Path) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_xlayer"))
        .args(args)
        .env("XLAYER_OUT_DIR", out)
        .output()
        .unwrap();
    (output.status.code().unwrap(), String::from_utf8_lossy(&output.stdout).into_owned())
}

#[test]
fn binary_exit_statuses() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();

    let (code, stdout) = xlayer(&["--T", "100", "scenario", "make video clearer"], out);
    assert_eq!(code, 0, "{stdout}");
    assert!(out.join("scenario/summary.json").is_file());

    assert_eq!(xlayer(&["scenario", "hello"], out).0, 3);

    let cfg = out.join("sim.json");
    fs::write(&cfg, r#"{"task": {"kind": "crosslayer-sim"}}"#).unwrap();
    assert_eq!(xlayer(&["--config", cfg.to_str().unwrap(), "verify-bounds"], out).0, 2);
    assert_eq!(xlayer(&["--config", "/nonexistent/x.json", "compare"], out).0, 1);
    assert_eq!(xlayer(&["--variant", "sideways", "compare"], out).0, 2);

    let cards = out.join("cards.json");
    fs::write(&cards, r#"{"agents": [{"id": "aAgent", "layer": "application", "description": "", "state_space": ["requests"], "action_space": ["360p"], "loss": "L1", "skills": []}]}"#).unwrap();
    assert_eq!(xlayer(&["--config", cards.to_str().unwrap(), "scenario", "make video clearer"], out).0, 4);
}
