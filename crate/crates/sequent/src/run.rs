//! Training jobs and their artifacts.
//!
//! A job is one (config, seed) pair. Its outputs are a [`RunReport`] (deterministic: the
//! same config and seed give byte-identical JSON), per-epoch metrics and a model
//! [`Snapshot`]. Wall-clock times are kept apart in a timing file so that reports stay
//! reproducible.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use sequent_core::data::{make_moons, make_spirals, split, standardize, Standardizer};
use sequent_core::training::{self, digest, train_classical, train_dqc, train_sequent};
use sequent_core::{
    AnyModel, ClassicalBaseline, Dataset, DqcModel, Model, SequentModel, TrainingReport,
};

use crate::config::{DatasetKind, ModelKind, RunConfig};
use crate::error::{Error, Result};
use crate::io::{create_dir, csv_error, csv_writer, load_features_csv, write_json};
use crate::snapshot::Snapshot;

/// Standardized train/test split of one seed's data.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub standardizer: Standardizer,
    pub provenance: String,
}

/// The raw dataset described by `config`, generated from `seed` when synthetic.
pub fn load_dataset(config: &RunConfig, seed: u64) -> Result<Dataset> {
    Ok(match config.dataset {
        DatasetKind::Moons => make_moons(config.samples, config.noise, seed)?,
        DatasetKind::Spirals => make_spirals(config.samples, config.noise, config.turns, seed)?,
        DatasetKind::Csv => {
            let path = config
                .data_file
                .as_deref()
                .ok_or_else(|| Error::Config("dataset csv needs --data-file".into()))?;
            load_features_csv(path, config.classes)?
        }
    })
}

pub fn prepare_data(config: &RunConfig, seed: u64) -> Result<PreparedData> {
    let raw = load_dataset(config, seed)?;
    let (train, test) = split(&raw, config.test_fraction, seed)?;
    let (train, test, standardizer) = standardize(&train, &test)?;
    Ok(PreparedData {
        train,
        test,
        standardizer,
        provenance: raw.provenance().to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub seed: u64,
    pub model: ModelKind,
    pub dataset: String,
    pub input_dim: usize,
    pub classes: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// One entry per training phase: a single phase for classical and DQC, the classical
    /// and quantum phases for SEQUENT.
    pub phases: Vec<TrainingReport>,
    pub final_train_accuracy: f64,
    pub final_test_accuracy: f64,
    /// Test-set counts, `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub theta_digest: String,
    pub phi_digest: String,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub snapshot: Snapshot,
    pub seconds: f64,
}

impl RunOutcome {
    /// File name stem shared by the job's artifacts.
    pub fn stem(&self) -> String {
        format!(
            "{}-{}-seed{}",
            self.report.model, self.report.config.dataset, self.report.seed
        )
    }
}

/// Trains one model on one seed's data.
pub fn run_job(config: &RunConfig, seed: u64) -> Result<RunOutcome> {
    let start = Instant::now();
    let data = prepare_data(config, seed)?;
    let (n, k) = (data.train.dim(), config.classes);
    let train_config = config.train_config(seed);
    let (model, phases) = match config.model {
        ModelKind::Classical => {
            let mut model = ClassicalBaseline::new(n, config.qubits, k, seed)?;
            let report = train_classical(&mut model, &data.train, &data.test, &train_config)?;
            (AnyModel::Classical(model), vec![report])
        }
        ModelKind::Dqc => {
            let mut model = DqcModel::new(n, config.circuit()?, k, seed)?;
            let report = train_dqc(&mut model, &data.train, &data.test, &train_config)?;
            (AnyModel::Dqc(model), vec![report])
        }
        ModelKind::Sequent => {
            let model = SequentModel::new(n, config.qubits, k, seed)?;
            let run = train_sequent(
                model,
                config.circuit()?,
                &data.train,
                &data.test,
                &train_config,
            )?;
            (
                AnyModel::Sequent(run.model),
                vec![run.classical_phase, run.quantum_phase],
            )
        }
    };
    let evaluation = training::evaluate(&model, &data.test)?;
    let last = phases
        .last()
        .expect("every model trains at least one phase");
    let report = RunReport {
        config: config.clone(),
        seed,
        model: config.model,
        dataset: data.provenance.clone(),
        input_dim: n,
        classes: k,
        train_size: data.train.len(),
        test_size: data.test.len(),
        final_train_accuracy: last.final_train_accuracy,
        final_test_accuracy: evaluation.accuracy,
        confusion: evaluation.confusion,
        theta_digest: digest(&model.classical_params()),
        phi_digest: digest(&model.quantum_params()),
        phases,
    };
    let snapshot = Snapshot::capture(config, seed, &model, &data.standardizer);
    Ok(RunOutcome {
        report,
        snapshot,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Applies `job` to every item on a pool of worker threads; results keep input order.
pub fn parallel_map<T, R, F>(items: &[T], job: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len());
    if workers <= 1 {
        return items.iter().map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let result = job(item);
                *slots[i].lock().expect("result slot poisoned") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("result slot poisoned")
                .expect("every job ran")
        })
        .collect()
}

/// Runs every seed of `config`; the first failure (in seed order) wins.
pub fn run_seeds(config: &RunConfig) -> Result<Vec<RunOutcome>> {
    parallel_map(&config.seeds, |&seed| run_job(config, seed))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Spread> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        };
        Some(Spread {
            median,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Aggregate over the seeds of one (model, dataset) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub model: ModelKind,
    pub dataset: DatasetKind,
    pub seeds: Vec<u64>,
    pub test_accuracies: Vec<f64>,
    pub test_accuracy: Spread,
}

impl RunSummary {
    pub fn of(config: &RunConfig, outcomes: &[RunOutcome]) -> Self {
        let test_accuracies: Vec<f64> = outcomes
            .iter()
            .map(|o| o.report.final_test_accuracy)
            .collect();
        RunSummary {
            config: config.clone(),
            model: config.model,
            dataset: config.dataset,
            seeds: outcomes.iter().map(|o| o.report.seed).collect(),
            test_accuracy: Spread::of(&test_accuracies).expect("at least one seed"),
            test_accuracies,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Timing {
    seed: u64,
    seconds: f64,
}

/// Columns: phase, epoch, train_loss, train_acc, test_acc.
pub fn write_metrics_csv(path: &Path, report: &RunReport) -> Result<()> {
    let mut writer = csv_writer(path)?;
    writer
        .write_record(["phase", "epoch", "train_loss", "train_acc", "test_acc"])
        .map_err(|e| csv_error(path, e))?;
    for phase in &report.phases {
        for m in &phase.epochs {
            writer
                .write_record([
                    phase.phase.clone(),
                    m.epoch.to_string(),
                    m.train_loss.to_string(),
                    m.train_accuracy.to_string(),
                    m.test_accuracy.to_string(),
                ])
                .map_err(|e| csv_error(path, e))?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Paths of one job's artifacts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactPaths {
    pub report: PathBuf,
    pub metrics: PathBuf,
    pub snapshot: PathBuf,
}

pub fn write_artifacts(dir: &Path, outcome: &RunOutcome) -> Result<ArtifactPaths> {
    let stem = outcome.stem();
    let paths = ArtifactPaths {
        report: dir.join(format!("{stem}.report.json")),
        metrics: dir.join(format!("{stem}.metrics.csv")),
        snapshot: dir.join(format!("{stem}.snapshot.json")),
    };
    write_json(&paths.report, &outcome.report)?;
    write_metrics_csv(&paths.metrics, &outcome.report)?;
    outcome.snapshot.save(&paths.snapshot)?;
    Ok(paths)
}

/// Writes per-seed artifacts plus `summary.json` and `timing.json` into `dir`.
pub fn write_run(dir: &Path, config: &RunConfig, outcomes: &[RunOutcome]) -> Result<RunSummary> {
    create_dir(dir)?;
    for outcome in outcomes {
        write_artifacts(dir, outcome)?;
    }
    let summary = RunSummary::of(config, outcomes);
    write_json(&dir.join("summary.json"), &summary)?;
    let timing: Vec<Timing> = outcomes
        .iter()
        .map(|o| Timing {
            seed: o.report.seed,
            seconds: o.seconds,
        })
        .collect();
    write_json(&dir.join("timing.json"), &timing)?;
    Ok(summary)
}

/// Trains every seed and only then touches the output directory, so a failed run leaves
/// no partial artifacts behind.
pub fn cmd_train(config: &RunConfig) -> Result<(RunSummary, Vec<RunOutcome>)> {
    config.validate()?;
    let outcomes = run_seeds(config)?;
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("runs"));
    let summary = write_run(&dir, config, &outcomes)?;
    Ok((summary, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PartialConfig;

    fn small(model: ModelKind) -> RunConfig {
        PartialConfig {
            model: Some(model),
            samples: Some(120),
            qubits: Some(3),
            depth: Some(2),
            epochs: Some(1),
            batch: Some(16),
            seeds: Some(vec![4, 5]),
            ..Default::default()
        }
        .resolve()
        .unwrap()
    }

    #[test]
    fn spread_statistics() {
        let s = Spread::of(&[0.9, 0.7, 0.8]).unwrap();
        assert_eq!((s.median, s.min, s.max), (0.8, 0.7, 0.9));
        assert_eq!(Spread::of(&[1.0, 0.0, 0.5, 0.25]).unwrap().median, 0.375);
        assert!(Spread::of(&[]).is_none());
    }

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<u64> = (0..37).collect();
        assert_eq!(
            parallel_map(&items, |x| x * x),
            items.iter().map(|x| x * x).collect::<Vec<_>>()
        );
    }

    #[test]
    fn jobs_are_deterministic_and_snapshots_reproduce_accuracy() {
        for kind in ModelKind::ALL {
            let config = small(kind);
            let a = run_job(&config, 4).unwrap();
            let b = run_job(&config, 4).unwrap();
            assert_eq!(
                serde_json::to_string(&a.report).unwrap(),
                serde_json::to_string(&b.report).unwrap()
            );
            let model = a.snapshot.restore().unwrap();
            let data = prepare_data(&config, 4).unwrap();
            let accuracy = training::evaluate(&model, &data.test).unwrap().accuracy;
            assert_eq!(accuracy, a.report.final_test_accuracy);
            let phases = if kind == ModelKind::Sequent { 2 } else { 1 };
            assert_eq!(a.report.phases.len(), phases);
        }
    }

    #[test]
    fn sequent_quantum_phase_trains_only_the_circuit() {
        let config = small(ModelKind::Sequent);
        let outcome = run_job(&config, 5).unwrap();
        let quantum = &outcome.report.phases[1];
        assert_eq!(quantum.trained_scalars, config.qubits * config.depth);
        assert_eq!(
            quantum.classical_digest_before,
            quantum.classical_digest_after
        );
    }

    #[test]
    fn metrics_csv_has_one_row_per_epoch() {
        let config = small(ModelKind::Sequent);
        let outcome = run_job(&config, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_metrics_csv(&path, &outcome.report).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "phase,epoch,train_loss,train_acc,test_acc");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("sequent-classical,1,"));
        assert!(lines[2].starts_with("sequent-quantum,1,"));

        let mut empty = outcome.report.clone();
        for phase in &mut empty.phases {
            phase.epochs.clear();
        }
        write_metrics_csv(&path, &empty).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), lines[0]);
    }
}
