//! Dataset CSV files: comma separated, no header, numeric feature columns followed by an
//! integer class label. Floats are written in shortest round-trip form, so a write/read
//! cycle is bit exact.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use sequent_core::Dataset;

use crate::error::{Error, Result};

/// Reads a feature file whose labels must lie in `0..classes`. Errors name the line.
pub fn load_features_csv(path: &Path, classes: usize) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut width = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |message: String| Error::format(path, format!("line {line}: {message}"));
        if record.len() < 2 {
            return Err(at(format!(
                "expected at least one feature and a label, found {} field(s)",
                record.len()
            )));
        }
        let dim = record.len() - 1;
        match width {
            None => width = Some(dim),
            Some(w) if w != dim => {
                return Err(at(format!(
                    "expected {} columns, found {}",
                    w + 1,
                    record.len()
                )))
            }
            Some(_) => {}
        }
        for (col, field) in record.iter().take(dim).enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| at(format!("column {}: {field:?} is not a number", col + 1)))?;
            if !value.is_finite() {
                return Err(at(format!("column {}: {field:?} is not finite", col + 1)));
            }
            features.push(value);
        }
        let raw = &record[dim];
        let label: usize = raw
            .parse()
            .map_err(|_| at(format!("label {raw:?} is not a non-negative integer")))?;
        if label >= classes {
            return Err(at(format!(
                "label {label} out of range for {classes} classes"
            )));
        }
        labels.push(label);
    }
    let Some(dim) = width else {
        return Err(Error::format(path, "file contains no samples"));
    };
    let provenance = format!("csv:{}", path.display());
    Ok(Dataset::new(dim, features, labels, classes, provenance)?)
}

/// Writes `dataset` in the format read by [`load_features_csv`].
pub fn write_dataset_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut writer = csv_writer(path)?;
    let mut fields = Vec::with_capacity(dataset.dim() + 1);
    for (row, label) in dataset.iter() {
        fields.clear();
        fields.extend(row.iter().map(f64::to_string));
        fields.push(label.to_string());
        writer
            .write_record(&fields)
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file))
}

pub fn csv_error(path: &Path, error: csv::Error) -> Error {
    Error::format(path, error.to_string())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use sequent_core::data::make_moons;

    fn write(dir: &tempfile::TempDir, text: &str) -> std::path::PathBuf {
        let path = dir.path().join("data.csv");
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn reads_exact_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "0.5,-1.25,0\n3,1e-3,1\n-0.1, 2.0 ,1\n");
        let data = load_features_csv(&path, 2).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.dim(), 2);
        assert_eq!(data.features(), &[0.5, -1.25, 3.0, 1e-3, -0.1, 2.0]);
        assert_eq!(data.labels(), &[0, 1, 1]);
    }

    #[test]
    fn rejects_bad_files_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let empty = write(&dir, "");
        assert!(load_features_csv(&empty, 2)
            .unwrap_err()
            .to_string()
            .contains("no samples"));

        let label = write(&dir, "0.1,0.2,0\n0.3,0.4,2\n");
        let err = load_features_csv(&label, 2).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("label 2"), "{err}");

        let ragged = write(&dir, "0.1,0.2,0\n0.3,1\n");
        assert!(load_features_csv(&ragged, 2)
            .unwrap_err()
            .to_string()
            .contains("line 2"));

        let text = write(&dir, "0.1,zero,1\n");
        assert!(load_features_csv(&text, 2)
            .unwrap_err()
            .to_string()
            .contains("line 1"));

        let missing = dir.path().join("absent.csv");
        assert!(matches!(
            load_features_csv(&missing, 2),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn write_then_read_is_bit_exact(seed in any::<u64>(), noise in 0.0f64..1.0) {
            let data = make_moons(40, noise, seed).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("moons.csv");
            write_dataset_csv(&path, &data).unwrap();
            let back = load_features_csv(&path, 2).unwrap();
            prop_assert_eq!(back.labels(), data.labels());
            for (a, b) in back.features().iter().zip(data.features()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
