//! Training regimes and evaluation.
//!
//! All randomness (batch order, circuit initialisation after the head swap) comes from
//! streams of the configured seed, and per-batch gradients are summed in sample order, so a
//! run is a pure function of its inputs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use crate::ansatz::CircuitConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{ClassicalBaseline, DqcModel, Model, SequentModel};
use crate::neural::{Adam, AdamConfig, Loss};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    /// Passes over the training set, per phase.
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    pub loss: Loss,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 4,
            batch_size: 32,
            optimizer: AdamConfig::default(),
            loss: Loss::CrossEntropy,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        self.optimizer.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean per-sample loss over the epoch, each sample measured before its batch update.
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainingReport {
    pub phase: String,
    pub config: TrainConfig,
    pub epochs: Vec<EpochMetrics>,
    pub final_train_accuracy: f64,
    pub final_test_accuracy: f64,
    /// Number of scalars the optimizer updated in this phase.
    pub trained_scalars: usize,
    pub classical_digest_before: String,
    pub classical_digest_after: String,
    pub quantum_digest_before: String,
    pub quantum_digest_after: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[true_class][predicted_class]`.
    pub confusion: Vec<Vec<usize>>,
}

/// SHA-256 over the little-endian bytes of `values`, hex encoded.
pub fn digest(values: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

fn check_compatible<M: Model + ?Sized>(model: &M, data: &Dataset) -> Result<()> {
    Error::check_len("sample width", model.input_dim(), data.dim())?;
    if data.classes() != model.num_classes() {
        return Err(Error::Config(alloc::format!(
            "model predicts {} classes but the dataset has {}",
            model.num_classes(),
            data.classes()
        )));
    }
    Ok(())
}

/// Arg-max accuracy and confusion counts.
pub fn evaluate<M: Model + ?Sized>(model: &M, dataset: &Dataset) -> Result<Evaluation> {
    if dataset.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty dataset".into()));
    }
    check_compatible(model, dataset)?;
    let k = dataset.classes();
    let mut confusion = vec![vec![0usize; k]; k];
    let mut correct = 0usize;
    for (x, label) in dataset.iter() {
        let predicted = model.predict(x)?;
        confusion[label][predicted] += 1;
        if predicted == label {
            correct += 1;
        }
    }
    Ok(Evaluation {
        accuracy: correct as f64 / dataset.len() as f64,
        confusion,
    })
}

/// Mini-batch Adam over the model's unfrozen parameters.
fn train_phase<M: Model + ?Sized>(
    model: &mut M,
    train: &Dataset,
    test: &Dataset,
    config: &TrainConfig,
    phase: &str,
    shuffle: Stream,
) -> Result<TrainingReport> {
    config.validate()?;
    check_compatible(model, train)?;
    check_compatible(model, test)?;

    let classical_digest_before = digest(&model.classical_params());
    let quantum_digest_before = digest(&model.quantum_params());
    let mut params = model.trainable_params();
    let mut optimizer = Adam::new(config.optimizer, params.len());
    let mut rng = stream(config.seed, shuffle);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut epochs = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grad = vec![0.0; params.len()];
            for &i in batch {
                let (loss, g) = model.backward(train.row(i), train.label(i), config.loss)?;
                if !loss.is_finite() {
                    return Err(Error::Divergence(alloc::format!(
                        "{phase}: loss is {loss} at epoch {} sample {i}",
                        epoch + 1
                    )));
                }
                loss_sum += loss;
                for (acc, v) in grad.iter_mut().zip(g.flatten()) {
                    *acc += v;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            for g in &mut grad {
                *g *= scale;
            }
            optimizer.step(&mut params, &grad)?;
            model.set_trainable_params(&params)?;
        }
        epochs.push(EpochMetrics {
            epoch: epoch + 1,
            train_loss: loss_sum / train.len() as f64,
            train_accuracy: evaluate(model, train)?.accuracy,
            test_accuracy: evaluate(model, test)?.accuracy,
        });
    }

    let (final_train_accuracy, final_test_accuracy) = match epochs.last() {
        Some(last) => (last.train_accuracy, last.test_accuracy),
        None => (
            evaluate(model, train)?.accuracy,
            evaluate(model, test)?.accuracy,
        ),
    };
    Ok(TrainingReport {
        phase: phase.into(),
        config: *config,
        epochs,
        final_train_accuracy,
        final_test_accuracy,
        trained_scalars: params.len(),
        classical_digest_before,
        classical_digest_after: digest(&model.classical_params()),
        quantum_digest_before,
        quantum_digest_after: digest(&model.quantum_params()),
    })
}

pub fn train_classical(
    model: &mut ClassicalBaseline,
    train: &Dataset,
    test: &Dataset,
    config: &TrainConfig,
) -> Result<TrainingReport> {
    train_phase(model, train, test, config, "classical", Stream::Shuffle)
}

/// Pre-processing layer, circuit angles and post-processing layer updated together.
pub fn train_dqc(
    model: &mut DqcModel,
    train: &Dataset,
    test: &Dataset,
    config: &TrainConfig,
) -> Result<TrainingReport> {
    train_phase(model, train, test, config, "dqc", Stream::Shuffle)
}

/// Result of the two SEQUENT phases.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentRun {
    pub model: SequentModel,
    pub classical_phase: TrainingReport,
    pub quantum_phase: TrainingReport,
}

/// Phase 1 trains compression and surrogate; the surrogate is then replaced by `circuit`
/// and phase 2 trains the circuit angles alone.
pub fn train_sequent(
    model: SequentModel,
    circuit: CircuitConfig,
    train: &Dataset,
    test: &Dataset,
    config: &TrainConfig,
) -> Result<SequentRun> {
    let mut model = model;
    let classical_phase = train_phase(
        &mut model,
        train,
        test,
        config,
        "sequent-classical",
        Stream::Shuffle,
    )?;
    let mut model = model.swap_surrogate_for_vqc(circuit, config.seed)?;
    let quantum_phase = train_phase(
        &mut model,
        train,
        test,
        config,
        "sequent-quantum",
        Stream::ShuffleQuantumPhase,
    )?;
    if quantum_phase.classical_digest_before != quantum_phase.classical_digest_after {
        return Err(Error::Divergence(
            "compression weights changed while frozen".into(),
        ));
    }
    Ok(SequentRun {
        model,
        classical_phase,
        quantum_phase,
    })
}
