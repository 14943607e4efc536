//! End-to-end checks of the `sequent` binary: artifacts, exit codes and reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sequent(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sequent"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> Option<i32> {
    output.status.code()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Flags for a small but complete run of any model.
const SMALL: &[&str] = &[
    "--samples",
    "200",
    "--qubits",
    "3",
    "--depth",
    "2",
    "--epochs",
    "1",
    "--batch",
    "16",
];

fn train(dir: &Path, model: &str, seeds: &str, out: &str) -> Output {
    let mut args = vec!["train", "--model", model, "--seeds", seeds, "--out", out];
    args.extend_from_slice(SMALL);
    sequent(dir, &args)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn train_writes_report_metrics_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(dir.path(), "sequent", "42", "run");
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let run = dir.path().join("run");
    for suffix in ["report.json", "metrics.csv", "snapshot.json"] {
        assert!(
            run.join(format!("sequent-moons-seed42.{suffix}")).exists(),
            "{suffix}"
        );
    }
    let report = read_json(&run.join("sequent-moons-seed42.report.json"));
    assert_eq!(report["seed"], 42);
    assert_eq!(report["config"]["model"], "sequent");
    assert_eq!(report["phases"].as_array().unwrap().len(), 2);
    assert_eq!(report["phases"][1]["trained_scalars"], 6);
    let snapshot = read_json(&run.join("sequent-moons-seed42.snapshot.json"));
    assert_eq!(snapshot["head"], "quantum");
    assert_eq!(snapshot["frozen_classical"], true);
    assert_eq!(snapshot["phi"].as_array().unwrap().len(), 6);
}

#[test]
fn five_seeds_give_five_reports_and_a_median() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(dir.path(), "classical", "1,2,3,4,5", "run");
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let run = dir.path().join("run");
    let reports = fs::read_dir(&run)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .ends_with(".report.json")
        })
        .count();
    assert_eq!(reports, 5);
    let summary = read_json(&run.join("summary.json"));
    let mut accuracies: Vec<f64> = summary["test_accuracies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    accuracies.sort_by(f64::total_cmp);
    assert_eq!(
        summary["test_accuracy"]["median"].as_f64().unwrap(),
        accuracies[2]
    );
}

#[test]
fn missing_data_file_is_a_config_error_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = sequent(
        dir.path(),
        &["train", "--data-file", "absent.csv", "--out", "run"],
    );
    assert_eq!(code(&out), Some(2));
    assert!(stderr(&out).contains("absent.csv"));
    assert!(!dir.path().join("run").exists());
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&sequent(
            dir.path(),
            &["train", "--qubits", "1", "--out", "run"]
        )),
        Some(2)
    );
    fs::write(dir.path().join("bad.json"), r#"{"learning-rate": 0.1}"#).unwrap();
    assert_eq!(
        code(&sequent(dir.path(), &["train", "--config", "bad.json"])),
        Some(2)
    );
    assert_eq!(
        code(&sequent(dir.path(), &["train", "--model", "quantum"])),
        Some(2)
    );
    assert!(!dir.path().join("run").exists());
}

#[test]
fn divergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = sequent(
        dir.path(),
        &[
            "train",
            "--model",
            "classical",
            "--lr",
            "1e308",
            "--samples",
            "100",
            "--out",
            "run",
        ],
    );
    assert_eq!(code(&out), Some(3), "{}", stderr(&out));
    assert!(!dir.path().join("run").exists());
}

#[test]
fn echoed_config_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(dir.path(), "dqc", "7", "first");
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let report_path = dir.path().join("first/dqc-moons-seed7.report.json");
    let report = read_json(&report_path);
    fs::write(dir.path().join("echo.json"), report["config"].to_string()).unwrap();
    let out = sequent(
        dir.path(),
        &["train", "--config", "echo.json", "--out", "second"],
    );
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let again = fs::read(dir.path().join("second/dqc-moons-seed7.report.json")).unwrap();
    assert_eq!(fs::read(&report_path).unwrap(), again);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"model": "dqc", "dataset.samples": 120, "qubits": 2, "depth": 1, "epochs": 1, "seeds": [3]}"#,
    )
    .unwrap();
    let out = sequent(
        dir.path(),
        &[
            "train",
            "--config",
            "c.json",
            "--model",
            "classical",
            "--out",
            "run",
        ],
    );
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let report = read_json(&dir.path().join("run/classical-moons-seed3.report.json"));
    assert_eq!(report["config"]["dataset.samples"], 120);
    assert_eq!(report["config"]["epochs"], 1);
}

#[test]
fn generate_data_then_train_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = sequent(
        dir.path(),
        &[
            "generate-data",
            "--dataset",
            "spirals",
            "--samples",
            "150",
            "--seed",
            "5",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(text.lines().count(), 150);
    assert!(text.lines().all(|l| l.split(',').count() == 3));

    let mut args = vec![
        "train",
        "--model",
        "classical",
        "--data-file",
        "s.csv",
        "--out",
        "run",
    ];
    args.extend_from_slice(SMALL);
    let out = sequent(dir.path(), &args);
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let report = read_json(&dir.path().join("run/classical-csv-seed0.report.json"));
    assert_eq!(
        report["train_size"].as_u64().unwrap() + report["test_size"].as_u64().unwrap(),
        150
    );

    let out = sequent(
        dir.path(),
        &[
            "evaluate",
            "--snapshot",
            "run/classical-csv-seed0.snapshot.json",
            "--data-file",
            "s.csv",
        ],
    );
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let evaluation: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(evaluation["samples"], 150);
    let total: u64 = evaluation["confusion"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|row| row.as_array().unwrap())
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(total, 150);
}

#[test]
fn evaluate_reproduces_the_reported_test_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(dir.path(), "sequent", "11", "run");
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let report = read_json(&dir.path().join("run/sequent-moons-seed11.report.json"));
    let out = sequent(
        dir.path(),
        &[
            "evaluate",
            "--snapshot",
            "run/sequent-moons-seed11.snapshot.json",
        ],
    );
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let evaluation: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(evaluation["accuracy"], report["final_test_accuracy"]);
}

#[test]
fn grid_export_has_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(dir.path(), "classical", "2", "run");
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let out = sequent(
        dir.path(),
        &[
            "grid",
            "--snapshot",
            "run/classical-moons-seed2.snapshot.json",
            "--bounds",
            "-2,2,-2,2",
            "--resolution",
            "100",
            "--out",
            "grid.csv",
        ],
    );
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,predicted_class,score_0,score_1"));
    let classes: std::collections::BTreeSet<&str> = lines
        .clone()
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(lines.count(), 10_000);
    assert_eq!(
        classes.len(),
        2,
        "a trained moons model predicts both classes"
    );

    fs::write(dir.path().join("corrupt.json"), "{\"format\": 3}").unwrap();
    let out = sequent(
        dir.path(),
        &["grid", "--snapshot", "corrupt.json", "--out", "g2.csv"],
    );
    assert_eq!(code(&out), Some(2));
}

#[test]
fn verify_passes_and_catches_an_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = sequent(dir.path(), &["verify"]);
    assert_eq!(
        code(&out),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );

    let out = sequent(dir.path(), &["verify", "--inject-fault", "flipped-cnot"]);
    assert_eq!(code(&out), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout
            .lines()
            .any(|l| l.starts_with("FAIL simulator-oracle")),
        "{stdout}"
    );
    assert!(stderr(&out).contains("simulator-oracle"));
}

#[test]
fn benchmark_writes_a_six_row_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("b.json"),
        r#"{
            "dataset.samples": 80, "moons.noise": 0.1, "spirals.noise": 0.05, "spirals.turns": 1.0,
            "qubits": 2, "depth": 1, "embed-axis": "Y", "entangle-axis": "Y",
            "epochs.classical": 1, "epochs.dqc": 1, "epochs.sequent": 1,
            "batch": 16, "lr": 0.05, "adam.beta1": 0.9, "adam.beta2": 0.999, "adam.epsilon": 1e-8,
            "loss": "cross-entropy", "seeds": [1, 2, 3], "test-fraction": 0.3
        }"#,
    )
    .unwrap();
    let out = sequent(
        dir.path(),
        &[
            "benchmark",
            "--config",
            "b.json",
            "--seeds",
            "4,5",
            "--out",
            "bench",
        ],
    );
    assert_eq!(code(&out), Some(0), "{}", stderr(&out));
    let summary = fs::read_to_string(dir.path().join("bench/summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("model,dataset,median_test_accuracy,min,max")
    );
    assert_eq!(lines.count(), 6);
    assert!(dir
        .path()
        .join("bench/moons/dqc/dqc-moons-seed5.report.json")
        .exists());
    assert!(!dir
        .path()
        .join("bench/moons/dqc/dqc-moons-seed1.report.json")
        .exists());
}
