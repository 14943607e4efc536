//! Run configuration: JSON files with flat keys that mirror the command-line flags.
//!
//! Resolution order is built-in defaults, then the config file, then flags. The resolved
//! [`RunConfig`] is echoed into every artifact; feeding that echo back in with `--config`
//! reproduces the run.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use sequent_core::statevector::MAX_QUBITS;
use sequent_core::{AdamConfig, Axis, CircuitConfig, Loss, TrainConfig};

use crate::error::{Error, Result};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Classical,
    Dqc,
    Sequent,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Classical, ModelKind::Dqc, ModelKind::Sequent];

    /// Epochs per phase when none are configured: SEQUENT runs two phases of two epochs,
    /// so every model sees the training set four times.
    pub fn default_epochs(self) -> usize {
        match self {
            ModelKind::Classical | ModelKind::Dqc => 4,
            ModelKind::Sequent => 2,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Classical => "classical",
            ModelKind::Dqc => "dqc",
            ModelKind::Sequent => "sequent",
        })
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Moons,
    Spirals,
    Csv,
}

impl DatasetKind {
    pub fn default_noise(self) -> f64 {
        match self {
            DatasetKind::Moons => 0.1,
            DatasetKind::Spirals => 0.05,
            DatasetKind::Csv => 0.0,
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Moons => "moons",
            DatasetKind::Spirals => "spirals",
            DatasetKind::Csv => "csv",
        })
    }
}

/// Every setting optional; used both for config files and for command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    #[arg(long)]
    #[serde(rename = "model", skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,

    #[arg(long)]
    #[serde(rename = "dataset", skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetKind>,

    /// Feature CSV (numeric columns, integer label last, no header).
    #[arg(long = "data-file")]
    #[serde(rename = "data-file", skip_serializing_if = "Option::is_none")]
    pub data_file: Option<PathBuf>,

    #[arg(long = "samples")]
    #[serde(rename = "dataset.samples", skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    #[arg(long = "noise")]
    #[serde(rename = "dataset.noise", skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,

    #[arg(long = "turns")]
    #[serde(rename = "dataset.turns", skip_serializing_if = "Option::is_none")]
    pub turns: Option<f64>,

    #[arg(long = "classes")]
    #[serde(rename = "dataset.classes", skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,

    #[arg(long)]
    #[serde(rename = "qubits", skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,

    #[arg(long)]
    #[serde(rename = "depth", skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,

    #[arg(long = "embed-axis")]
    #[serde(rename = "embed-axis", skip_serializing_if = "Option::is_none")]
    pub embed_axis: Option<Axis>,

    #[arg(long = "entangle-axis")]
    #[serde(rename = "entangle-axis", skip_serializing_if = "Option::is_none")]
    pub entangle_axis: Option<Axis>,

    /// Epochs per training phase.
    #[arg(long)]
    #[serde(rename = "epochs", skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,

    #[arg(long)]
    #[serde(rename = "batch", skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,

    #[arg(long)]
    #[serde(rename = "lr", skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,

    #[arg(long = "adam-beta1")]
    #[serde(rename = "adam.beta1", skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,

    #[arg(long = "adam-beta2")]
    #[serde(rename = "adam.beta2", skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,

    #[arg(long = "adam-epsilon")]
    #[serde(rename = "adam.epsilon", skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,

    /// cross-entropy or squared-error.
    #[arg(long)]
    #[serde(rename = "loss", skip_serializing_if = "Option::is_none")]
    pub loss: Option<Loss>,

    /// One or more seeds, comma separated; each seed is an independent run.
    #[arg(long = "seeds", visible_alias = "seed", value_delimiter = ',', num_args = 1..)]
    #[serde(rename = "seeds", skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,

    #[arg(long = "test-fraction")]
    #[serde(rename = "test-fraction", skip_serializing_if = "Option::is_none")]
    pub test_fraction: Option<f64>,

    /// Output directory (or file, for generate-data and grid).
    #[arg(long)]
    #[serde(rename = "out", skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),+ $(,)?) => {
        PartialConfig { $($field: $top.$field.or($base.$field)),+ }
    };
}

impl PartialConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format(origin, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    /// Values set in `top` win.
    pub fn overlay(self, top: PartialConfig) -> PartialConfig {
        overlay!(
            self,
            top,
            model,
            dataset,
            data_file,
            samples,
            noise,
            turns,
            classes,
            qubits,
            depth,
            embed_axis,
            entangle_axis,
            epochs,
            batch,
            lr,
            beta1,
            beta2,
            epsilon,
            loss,
            seeds,
            test_fraction,
            out,
        )
    }

    /// Fills defaults and validates the whole configuration.
    pub fn resolve(self) -> Result<RunConfig> {
        let dataset = match (self.dataset, &self.data_file) {
            (None, Some(_)) | (Some(DatasetKind::Csv), Some(_)) => DatasetKind::Csv,
            (Some(DatasetKind::Csv), None) => {
                return Err(Error::Config("dataset csv needs --data-file".into()))
            }
            (Some(kind), Some(_)) => {
                return Err(Error::Config(format!(
                    "--data-file conflicts with the {kind} generator"
                )))
            }
            (Some(kind), None) => kind,
            (None, None) => DatasetKind::Moons,
        };
        let model = self.model.unwrap_or(ModelKind::Sequent);
        let defaults = AdamConfig::default();
        let config = RunConfig {
            model,
            dataset,
            data_file: self.data_file,
            samples: self.samples.unwrap_or(2000),
            noise: self.noise.unwrap_or(dataset.default_noise()),
            turns: self.turns.unwrap_or(1.5),
            classes: self.classes.unwrap_or(2),
            qubits: self.qubits.unwrap_or(6),
            depth: self.depth.unwrap_or(10),
            embed_axis: self.embed_axis.unwrap_or(Axis::Y),
            entangle_axis: self.entangle_axis.unwrap_or(Axis::Y),
            epochs: self.epochs.unwrap_or(model.default_epochs()),
            batch: self.batch.unwrap_or(32),
            lr: self.lr.unwrap_or(defaults.learning_rate),
            beta1: self.beta1.unwrap_or(defaults.beta1),
            beta2: self.beta2.unwrap_or(defaults.beta2),
            epsilon: self.epsilon.unwrap_or(defaults.epsilon),
            loss: self.loss.unwrap_or_default(),
            seeds: self.seeds.unwrap_or_else(|| vec![0]),
            test_fraction: self.test_fraction.unwrap_or(0.3),
            out: self.out,
        };
        config.validate()?;
        Ok(config)
    }
}

/// A fully resolved run. Hidden width of the classical baseline always equals `qubits`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "model")]
    pub model: ModelKind,
    #[serde(rename = "dataset")]
    pub dataset: DatasetKind,
    #[serde(rename = "data-file", skip_serializing_if = "Option::is_none", default)]
    pub data_file: Option<PathBuf>,
    #[serde(rename = "dataset.samples")]
    pub samples: usize,
    #[serde(rename = "dataset.noise")]
    pub noise: f64,
    #[serde(rename = "dataset.turns")]
    pub turns: f64,
    #[serde(rename = "dataset.classes")]
    pub classes: usize,
    #[serde(rename = "qubits")]
    pub qubits: usize,
    #[serde(rename = "depth")]
    pub depth: usize,
    #[serde(rename = "embed-axis")]
    pub embed_axis: Axis,
    #[serde(rename = "entangle-axis")]
    pub entangle_axis: Axis,
    #[serde(rename = "epochs")]
    pub epochs: usize,
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
    /// Where artifacts go; not part of the echo since it does not affect results.
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.qubits == 0 || self.qubits > MAX_QUBITS {
            return fail(format!(
                "qubits must be in 1..={MAX_QUBITS}, got {}",
                self.qubits
            ));
        }
        if self.classes < 2 {
            return fail(format!("need at least 2 classes, got {}", self.classes));
        }
        if self.qubits < self.classes {
            return fail(format!(
                "{} classes need at least {} qubits, got {}",
                self.classes, self.classes, self.qubits
            ));
        }
        if matches!(self.dataset, DatasetKind::Moons | DatasetKind::Spirals) {
            if self.classes != 2 {
                return fail(format!("the {} generator produces 2 classes", self.dataset));
            }
            if self.samples < 4 {
                return fail(format!("need at least 4 samples, got {}", self.samples));
            }
            if !(self.noise.is_finite() && self.noise >= 0.0) {
                return fail(format!(
                    "noise must be finite and non-negative, got {}",
                    self.noise
                ));
            }
            if !(self.turns.is_finite() && self.turns > 0.0) {
                return fail(format!("turns must be positive, got {}", self.turns));
            }
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail(format!(
                "test-fraction must lie in (0, 1), got {}",
                self.test_fraction
            ));
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return fail("seeds must be distinct".into());
        }
        self.train_config(0).validate()?;
        self.circuit()?;
        Ok(())
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            optimizer: AdamConfig {
                learning_rate: self.lr,
                beta1: self.beta1,
                beta2: self.beta2,
                epsilon: self.epsilon,
            },
            loss: self.loss,
            seed,
        }
    }

    /// The circuit of the configured model: all qubits measured for DQC, one per class
    /// for SEQUENT. The classical baseline gets the SEQUENT shape for reference only.
    pub fn circuit(&self) -> Result<CircuitConfig> {
        let outputs = match self.model {
            ModelKind::Dqc => self.qubits,
            ModelKind::Classical | ModelKind::Sequent => self.classes,
        };
        Ok(CircuitConfig::with_axes(
            self.qubits,
            self.depth,
            outputs,
            self.embed_axis,
            self.entangle_axis,
        )?)
    }

    /// Back to the optional form, e.g. to re-apply flags on top of an echoed config.
    pub fn to_partial(&self) -> PartialConfig {
        PartialConfig {
            model: Some(self.model),
            dataset: Some(self.dataset),
            data_file: self.data_file.clone(),
            samples: Some(self.samples),
            noise: Some(self.noise),
            turns: Some(self.turns),
            classes: Some(self.classes),
            qubits: Some(self.qubits),
            depth: Some(self.depth),
            embed_axis: Some(self.embed_axis),
            entangle_axis: Some(self.entangle_axis),
            epochs: Some(self.epochs),
            batch: Some(self.batch),
            lr: Some(self.lr),
            beta1: Some(self.beta1),
            beta2: Some(self.beta2),
            epsilon: Some(self.epsilon),
            loss: Some(self.loss),
            seeds: Some(self.seeds.clone()),
            test_fraction: Some(self.test_fraction),
            out: self.out.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<PartialConfig> {
        PartialConfig::from_json(text, Path::new("test.json"))
    }

    #[test]
    fn defaults_follow_the_model() {
        let config = PartialConfig::default().resolve().unwrap();
        assert_eq!(config.model, ModelKind::Sequent);
        assert_eq!(config.epochs, 2);
        assert_eq!((config.qubits, config.depth, config.batch), (6, 10, 32));
        assert_eq!(config.lr, 0.01);
        assert_eq!(config.noise, 0.1);

        let classical = PartialConfig {
            model: Some(ModelKind::Classical),
            dataset: Some(DatasetKind::Spirals),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(classical.epochs, 4);
        assert_eq!((classical.noise, classical.turns), (0.05, 1.5));
    }

    #[test]
    fn flags_override_file_values() {
        let file =
            parse(r#"{"model": "dqc", "lr": 0.5, "dataset.noise": 0.2, "seeds": [1, 2]}"#).unwrap();
        let flags = PartialConfig {
            lr: Some(0.02),
            ..Default::default()
        };
        let config = file.overlay(flags).resolve().unwrap();
        assert_eq!(config.model, ModelKind::Dqc);
        assert_eq!(config.lr, 0.02);
        assert_eq!(config.noise, 0.2);
        assert_eq!(config.seeds, vec![1, 2]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse(r#"{"learning-rate": 0.1}"#).is_err());
        assert!(parse(r#"{"embed-axis": "W"}"#).is_err());
    }

    #[test]
    fn cross_field_checks() {
        let too_few_qubits = PartialConfig {
            qubits: Some(1),
            ..Default::default()
        };
        assert!(too_few_qubits.resolve().is_err());
        let conflicting = PartialConfig {
            dataset: Some(DatasetKind::Moons),
            data_file: Some("x.csv".into()),
            ..Default::default()
        };
        assert!(conflicting.resolve().is_err());
        let csv_without_file = PartialConfig {
            dataset: Some(DatasetKind::Csv),
            ..Default::default()
        };
        assert!(csv_without_file.resolve().is_err());
        let repeated = PartialConfig {
            seeds: Some(vec![3, 3]),
            ..Default::default()
        };
        assert!(repeated.resolve().is_err());
        for fraction in [0.0, 1.0, f64::NAN] {
            let bad = PartialConfig {
                test_fraction: Some(fraction),
                ..Default::default()
            };
            assert!(bad.resolve().is_err());
        }
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        let config = PartialConfig {
            model: Some(ModelKind::Dqc),
            lr: Some(0.1 + 0.2),
            seeds: Some(vec![5, 7]),
            out: Some("ignored".into()),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let text = serde_json::to_string(&config).unwrap();
        assert!(!text.contains("ignored"));
        let back = parse(&text).unwrap().resolve().unwrap();
        assert_eq!(back.lr.to_bits(), config.lr.to_bits());
        assert_eq!(
            RunConfig {
                out: None,
                ..config
            },
            back
        );
    }
}
