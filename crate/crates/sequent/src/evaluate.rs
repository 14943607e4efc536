//! Scoring a saved model on held-out or external data.

use std::path::Path;

use serde::Serialize;

use sequent_core::training::{evaluate, Evaluation};
use sequent_core::Dataset;

use crate::error::Result;
use crate::io::load_features_csv;
use crate::run::prepare_data;
use crate::snapshot::Snapshot;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub source: String,
    pub samples: usize,
    #[serde(flatten)]
    pub evaluation: Evaluation,
}

/// Scores the snapshot on `data_file` (raw features, standardized with the snapshot's
/// training statistics) or, without one, on the test split the model was trained against.
pub fn cmd_evaluate(snapshot_path: &Path, data_file: Option<&Path>) -> Result<EvaluationReport> {
    let snapshot = Snapshot::load(snapshot_path)?;
    let model = snapshot.restore()?;
    let data = match data_file {
        Some(path) => {
            let raw = load_features_csv(path, snapshot.classes)?;
            let features = raw
                .iter()
                .map(|(row, _)| snapshot.preprocess(row))
                .collect::<Result<Vec<_>>>()?
                .concat();
            Dataset::new(
                raw.dim(),
                features,
                raw.labels().to_vec(),
                raw.classes(),
                raw.provenance(),
            )?
        }
        None => prepare_data(&snapshot.config, snapshot.seed)?.test,
    };
    Ok(EvaluationReport {
        source: data.provenance().to_string(),
        samples: data.len(),
        evaluation: evaluate(&model, &data)?,
    })
}
