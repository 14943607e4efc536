//! The moons / spirals comparison of all three models over several seeds.
//!
//! Settings come from a benchmark config (the calibrated defaults ship as
//! `configs/benchmark.json` and are compiled in). Every (dataset, model, seed) job runs
//! independently; results are joined and sorted before anything is aggregated.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sequent_core::{Axis, Loss};

use crate::config::{DatasetKind, ModelKind, PartialConfig, RunConfig};
use crate::error::{Error, Result};
use crate::io::{create_dir, csv_error, csv_writer, write_json};
use crate::run::{parallel_map, run_job, write_artifacts, RunOutcome, Spread};

pub const DEFAULT_CONFIG: &str = include_str!("../configs/benchmark.json");

pub const DATASETS: [DatasetKind; 2] = [DatasetKind::Moons, DatasetKind::Spirals];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(rename = "dataset.samples")]
    pub samples: usize,
    #[serde(rename = "moons.noise")]
    pub moons_noise: f64,
    #[serde(rename = "spirals.noise")]
    pub spirals_noise: f64,
    #[serde(rename = "spirals.turns")]
    pub spirals_turns: f64,
    #[serde(rename = "qubits")]
    pub qubits: usize,
    #[serde(rename = "depth")]
    pub depth: usize,
    #[serde(rename = "embed-axis")]
    pub embed_axis: Axis,
    #[serde(rename = "entangle-axis")]
    pub entangle_axis: Axis,
    #[serde(rename = "epochs.classical")]
    pub epochs_classical: usize,
    #[serde(rename = "epochs.dqc")]
    pub epochs_dqc: usize,
    #[serde(rename = "epochs.sequent")]
    pub epochs_sequent: usize,
    #[serde(rename = "batch")]
    pub batch: usize,
    #[serde(rename = "lr")]
    pub lr: f64,
    #[serde(rename = "adam.beta1")]
    pub beta1: f64,
    #[serde(rename = "adam.beta2")]
    pub beta2: f64,
    #[serde(rename = "adam.epsilon")]
    pub epsilon: f64,
    #[serde(rename = "loss")]
    pub loss: Loss,
    #[serde(rename = "seeds")]
    pub seeds: Vec<u64>,
    #[serde(rename = "test-fraction")]
    pub test_fraction: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_CONFIG).expect("bundled benchmark config is valid")
    }
}

impl BenchmarkConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    /// The resolved run for one cell of the comparison.
    pub fn run_config(&self, model: ModelKind, dataset: DatasetKind) -> Result<RunConfig> {
        let (noise, epochs) = (
            match dataset {
                DatasetKind::Spirals => self.spirals_noise,
                _ => self.moons_noise,
            },
            match model {
                ModelKind::Classical => self.epochs_classical,
                ModelKind::Dqc => self.epochs_dqc,
                ModelKind::Sequent => self.epochs_sequent,
            },
        );
        PartialConfig {
            model: Some(model),
            dataset: Some(dataset),
            samples: Some(self.samples),
            noise: Some(noise),
            turns: Some(self.spirals_turns),
            qubits: Some(self.qubits),
            depth: Some(self.depth),
            embed_axis: Some(self.embed_axis),
            entangle_axis: Some(self.entangle_axis),
            epochs: Some(epochs),
            batch: Some(self.batch),
            lr: Some(self.lr),
            beta1: Some(self.beta1),
            beta2: Some(self.beta2),
            epsilon: Some(self.epsilon),
            loss: Some(self.loss),
            seeds: Some(self.seeds.clone()),
            test_fraction: Some(self.test_fraction),
            ..Default::default()
        }
        .resolve()
    }

    /// Every (dataset, model) cell, validated before any training starts.
    pub fn cells(&self) -> Result<Vec<RunConfig>> {
        let mut cells = Vec::new();
        for dataset in DATASETS {
            for model in ModelKind::ALL {
                cells.push(self.run_config(model, dataset)?);
            }
        }
        Ok(cells)
    }
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: ModelKind,
    pub dataset: DatasetKind,
    pub seeds: Vec<u64>,
    pub test_accuracies: Vec<f64>,
    pub test_accuracy: Spread,
    /// Sum of the per-seed job times.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub config: BenchmarkConfig,
    pub rows: Vec<SummaryRow>,
    /// Every job, ordered by dataset, model, then seed.
    pub runs: Vec<RunOutcome>,
}

impl BenchmarkResult {
    pub fn row(&self, model: ModelKind, dataset: DatasetKind) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.dataset == dataset)
    }

    pub fn runs_of(
        &self,
        model: ModelKind,
        dataset: DatasetKind,
    ) -> impl Iterator<Item = &RunOutcome> {
        self.runs
            .iter()
            .filter(move |r| r.report.model == model && r.report.config.dataset == dataset)
    }

    /// Sum of the job times of one dataset.
    pub fn dataset_seconds(&self, dataset: DatasetKind) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.dataset == dataset)
            .map(|r| r.seconds)
            .sum()
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:<8} {:>7} {:>7} {:>7}",
            "model", "dataset", "median", "min", "max"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:<8} {:>7.4} {:>7.4} {:>7.4}",
                r.model.to_string(),
                r.dataset.to_string(),
                r.test_accuracy.median,
                r.test_accuracy.min,
                r.test_accuracy.max
            );
        }
        out
    }
}

/// Trains every job without touching the file system.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkResult> {
    let cells = config.cells()?;
    let jobs: Vec<(usize, u64)> = cells
        .iter()
        .enumerate()
        .flat_map(|(i, cell)| cell.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let runs: Vec<RunOutcome> = parallel_map(&jobs, |&(i, seed)| run_job(&cells[i], seed))
        .into_iter()
        .collect::<Result<_>>()?;
    let rows = cells
        .iter()
        .map(|cell| {
            let outcomes: Vec<&RunOutcome> = runs
                .iter()
                .filter(|r| r.report.model == cell.model && r.report.config.dataset == cell.dataset)
                .collect();
            let accuracies: Vec<f64> = outcomes
                .iter()
                .map(|o| o.report.final_test_accuracy)
                .collect();
            SummaryRow {
                model: cell.model,
                dataset: cell.dataset,
                seeds: outcomes.iter().map(|o| o.report.seed).collect(),
                test_accuracy: Spread::of(&accuracies).expect("at least one seed"),
                test_accuracies: accuracies,
                seconds: outcomes.iter().map(|o| o.seconds).sum(),
            }
        })
        .collect();
    Ok(BenchmarkResult {
        config: config.clone(),
        rows,
        runs,
    })
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a BenchmarkConfig,
    rows: &'a [SummaryRow],
}

#[derive(Serialize)]
struct TimingRow {
    model: ModelKind,
    dataset: DatasetKind,
    seconds: f64,
}

/// Writes per-run artifacts under `<dir>/<dataset>/<model>/`, `summary.csv`
/// (model, dataset, median, min, max), `summary.json` and `timing.json`.
pub fn write_benchmark(dir: &Path, result: &BenchmarkResult) -> Result<()> {
    create_dir(dir)?;
    for run in &result.runs {
        let sub = dir
            .join(run.report.config.dataset.to_string())
            .join(run.report.model.to_string());
        create_dir(&sub)?;
        write_artifacts(&sub, run)?;
    }
    let path = dir.join("summary.csv");
    let mut writer = csv_writer(&path)?;
    writer
        .write_record(["model", "dataset", "median_test_accuracy", "min", "max"])
        .map_err(|e| csv_error(&path, e))?;
    for r in &result.rows {
        writer
            .write_record([
                r.model.to_string(),
                r.dataset.to_string(),
                r.test_accuracy.median.to_string(),
                r.test_accuracy.min.to_string(),
                r.test_accuracy.max.to_string(),
            ])
            .map_err(|e| csv_error(&path, e))?;
    }
    writer.flush().map_err(|e| Error::io(&path, e))?;
    write_json(
        &dir.join("summary.json"),
        &Summary {
            config: &result.config,
            rows: &result.rows,
        },
    )?;
    let timing: Vec<TimingRow> = result
        .rows
        .iter()
        .map(|r| TimingRow {
            model: r.model,
            dataset: r.dataset,
            seconds: r.seconds,
        })
        .collect();
    write_json(&dir.join("timing.json"), &timing)
}

pub fn cmd_benchmark(config: &BenchmarkConfig, dir: &Path) -> Result<BenchmarkResult> {
    let result = run_benchmark(config)?;
    write_benchmark(dir, &result)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> BenchmarkConfig {
        BenchmarkConfig {
            samples: 60,
            qubits: 2,
            depth: 1,
            epochs_classical: 1,
            epochs_dqc: 1,
            epochs_sequent: 1,
            seeds: vec![1, 2],
            ..Default::default()
        }
    }

    #[test]
    fn bundled_config_parses_and_resolves() {
        let config = BenchmarkConfig::default();
        assert_eq!((config.qubits, config.depth, config.samples), (6, 10, 2000));
        let cells = config.cells().unwrap();
        assert_eq!(cells.len(), 6);
        let sequent = config
            .run_config(ModelKind::Sequent, DatasetKind::Spirals)
            .unwrap();
        assert_eq!(sequent.noise, config.spirals_noise);
        assert_eq!(sequent.epochs, config.epochs_sequent);
    }

    #[test]
    fn summary_has_six_rows_and_artifacts() {
        let result = run_benchmark(&tiny()).unwrap();
        assert_eq!(result.rows.len(), 6);
        assert_eq!(result.runs.len(), 12);
        let dir = tempfile::tempdir().unwrap();
        write_benchmark(dir.path(), &result).unwrap();
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 7);
        assert!(dir
            .path()
            .join("spirals/sequent/sequent-spirals-seed2.snapshot.json")
            .exists());
        assert!(result.table().lines().count() == 7);
    }
}
