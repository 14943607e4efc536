//! Trained-model snapshots.
//!
//! Layout (JSON): `format`, the resolved `config` and `seed` of the run, the `model` kind,
//! the SEQUENT `head` mode and `frozen_classical` flag, `input_dim`, `classes`, the
//! `circuit` shape, the `standardizer` fitted on the training split, and the flat parameter
//! vectors `theta` (classical) and `phi` (quantum). Layer shapes follow from the model kind:
//!
//! * classical: hidden `input_dim → qubits` (tanh), output `qubits → classes`
//! * dqc: pre `input_dim → qubits` (scaled tanh), post `qubits → classes`
//! * sequent: compression `input_dim → qubits` (scaled tanh), plus the surrogate
//!   `qubits → classes` while the head is still classical
//!
//! Each layer contributes its row-major weights followed by its bias to `theta`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sequent_core::data::Standardizer;
use sequent_core::{
    Activation, AnyModel, CircuitConfig, ClassicalBaseline, DenseLayer, DqcModel, HeadMode, Model,
    QuantumParams, SequentModel,
};

use crate::config::{ModelKind, RunConfig};
use crate::error::{Error, Result};
use crate::io::write_json;

pub const SNAPSHOT_FORMAT: &str = "sequent-snapshot/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub format: String,
    pub config: RunConfig,
    pub seed: u64,
    pub model: ModelKind,
    pub head: Option<HeadMode>,
    pub frozen_classical: bool,
    pub input_dim: usize,
    pub classes: usize,
    pub circuit: Option<CircuitConfig>,
    pub standardizer: Standardizer,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

struct Cursor<'a> {
    rest: &'a [f64],
}

impl Cursor<'_> {
    fn layer(
        &mut self,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
    ) -> Result<DenseLayer> {
        let weights = in_dim * out_dim;
        let needed = weights + out_dim;
        if self.rest.len() < needed {
            return Err(Error::Config(format!(
                "snapshot theta is too short for a {in_dim}→{out_dim} layer"
            )));
        }
        let (head, rest) = self.rest.split_at(needed);
        self.rest = rest;
        Ok(DenseLayer::from_parts(
            in_dim,
            out_dim,
            head[..weights].to_vec(),
            head[weights..].to_vec(),
            activation,
        )?)
    }

    fn finish(self) -> Result<()> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "snapshot theta has {} unused values",
                self.rest.len()
            )))
        }
    }
}

impl Snapshot {
    pub fn capture(
        config: &RunConfig,
        seed: u64,
        model: &AnyModel,
        standardizer: &Standardizer,
    ) -> Self {
        let (kind, head, circuit) = match model {
            AnyModel::Classical(_) => (ModelKind::Classical, None, None),
            AnyModel::Dqc(m) => (ModelKind::Dqc, None, Some(*m.circuit())),
            AnyModel::Sequent(m) => (ModelKind::Sequent, Some(m.mode()), m.circuit().copied()),
        };
        Snapshot {
            format: SNAPSHOT_FORMAT.into(),
            config: config.clone(),
            seed,
            model: kind,
            head,
            frozen_classical: model.classical_frozen(),
            input_dim: model.input_dim(),
            classes: model.num_classes(),
            circuit,
            standardizer: standardizer.clone(),
            theta: model.classical_params(),
            phi: model.quantum_params(),
        }
    }

    /// Rebuilds the model; every shape is checked against the stored vectors.
    pub fn restore(&self) -> Result<AnyModel> {
        if self.format != SNAPSHOT_FORMAT {
            return Err(Error::Config(format!(
                "unsupported snapshot format {:?} (expected {SNAPSHOT_FORMAT:?})",
                self.format
            )));
        }
        if self.standardizer.mean.len() != self.input_dim
            || self.standardizer.std.len() != self.input_dim
        {
            return Err(Error::Config(
                "snapshot standardizer does not match input_dim".into(),
            ));
        }
        let (n, h, k) = (self.input_dim, self.config.qubits, self.classes);
        let mut theta = Cursor { rest: &self.theta };
        let circuit = || {
            self.circuit
                .ok_or_else(|| Error::Config(format!("{} snapshot has no circuit", self.model)))
        };
        let phi = |circuit: &CircuitConfig| QuantumParams::from_flat(circuit, self.phi.clone());
        let no_phi = || {
            if self.phi.is_empty() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{} snapshot carries {} unexpected circuit angles",
                    self.model,
                    self.phi.len()
                )))
            }
        };
        let model = match (self.model, self.head) {
            (ModelKind::Classical, None) => {
                no_phi()?;
                let hidden = theta.layer(n, h, Activation::Tanh)?;
                let output = theta.layer(h, k, Activation::Identity)?;
                theta.finish()?;
                AnyModel::Classical(ClassicalBaseline::from_layers(hidden, output)?)
            }
            (ModelKind::Dqc, None) => {
                let circuit = circuit()?;
                let pre = theta.layer(n, circuit.num_qubits, Activation::ScaledTanh)?;
                let post = theta.layer(circuit.num_qubits, k, Activation::Identity)?;
                theta.finish()?;
                AnyModel::Dqc(DqcModel::from_parts(pre, circuit, phi(&circuit)?, post)?)
            }
            (ModelKind::Sequent, Some(HeadMode::Surrogate)) => {
                no_phi()?;
                let compression = theta.layer(n, h, Activation::ScaledTanh)?;
                let surrogate = theta.layer(h, k, Activation::Identity)?;
                theta.finish()?;
                AnyModel::Sequent(SequentModel::with_surrogate_head(compression, surrogate)?)
            }
            (ModelKind::Sequent, Some(HeadMode::Quantum)) => {
                let circuit = circuit()?;
                let compression = theta.layer(n, circuit.num_qubits, Activation::ScaledTanh)?;
                theta.finish()?;
                AnyModel::Sequent(SequentModel::with_quantum_head(
                    compression,
                    circuit,
                    phi(&circuit)?,
                    self.frozen_classical,
                )?)
            }
            (kind, head) => {
                return Err(Error::Config(format!(
                    "{kind} snapshot with head mode {head:?} is not a valid combination"
                )))
            }
        };
        if model.num_classes() != k {
            return Err(Error::Config(format!(
                "snapshot declares {k} classes but the model predicts {}",
                model.num_classes()
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    /// Maps a raw feature row into the space the model was trained in.
    pub fn preprocess(&self, row: &[f64]) -> Result<Vec<f64>> {
        Ok(self.standardizer.transform_row(row)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PartialConfig;

    fn standardizer(n: usize) -> Standardizer {
        Standardizer {
            mean: vec![0.25; n],
            std: vec![1.5; n],
        }
    }

    fn round_trip(config: &RunConfig, model: AnyModel) {
        let snapshot = Snapshot::capture(config, 9, &model, &standardizer(2));
        let text = serde_json::to_string(&snapshot).unwrap();
        let back: Snapshot = serde_json::from_str(&text).unwrap();
        let restored = back.restore().unwrap();
        let bits = |v: Vec<f64>| v.into_iter().map(f64::to_bits).collect::<Vec<_>>();
        assert_eq!(
            bits(restored.classical_params()),
            bits(model.classical_params())
        );
        assert_eq!(
            bits(restored.quantum_params()),
            bits(model.quantum_params())
        );
        assert_eq!(restored, model);
    }

    fn config(model: ModelKind) -> RunConfig {
        PartialConfig {
            model: Some(model),
            qubits: Some(3),
            depth: Some(2),
            ..Default::default()
        }
        .resolve()
        .unwrap()
    }

    #[test]
    fn every_model_round_trips_losslessly() {
        let classical = config(ModelKind::Classical);
        round_trip(
            &classical,
            AnyModel::Classical(ClassicalBaseline::new(2, 3, 2, 1).unwrap()),
        );

        let dqc = config(ModelKind::Dqc);
        round_trip(
            &dqc,
            AnyModel::Dqc(DqcModel::new(2, dqc.circuit().unwrap(), 2, 2).unwrap()),
        );

        let sequent = config(ModelKind::Sequent);
        let surrogate = SequentModel::new(2, 3, 2, 3).unwrap();
        round_trip(&sequent, AnyModel::Sequent(surrogate.clone()));
        let quantum = surrogate
            .swap_surrogate_for_vqc(sequent.circuit().unwrap(), 3)
            .unwrap();
        round_trip(&sequent, AnyModel::Sequent(quantum));
    }

    #[test]
    fn corrupt_snapshots_are_rejected() {
        let config = config(ModelKind::Dqc);
        let model = AnyModel::Dqc(DqcModel::new(2, config.circuit().unwrap(), 2, 2).unwrap());
        let good = Snapshot::capture(&config, 1, &model, &standardizer(2));

        let mut short = good.clone();
        short.theta.pop();
        assert!(short.restore().is_err());

        let mut long = good.clone();
        long.phi.push(0.0);
        assert!(long.restore().is_err());

        let mut no_circuit = good.clone();
        no_circuit.circuit = None;
        assert!(no_circuit.restore().is_err());

        let mut wrong_format = good.clone();
        wrong_format.format = "other".into();
        assert!(wrong_format.restore().is_err());

        let mut bad_head = good;
        bad_head.head = Some(HeadMode::Quantum);
        assert!(bad_head.restore().is_err());
    }
}
