//! Benchmark datasets, stratified splits and standardization.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Labelled feature matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
    classes: usize,
    provenance: String,
}

impl Dataset {
    pub fn new(
        dim: usize,
        features: Vec<f64>,
        labels: Vec<usize>,
        classes: usize,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Data("dataset has no samples".into()));
        }
        if dim == 0 {
            return Err(Error::Data("dataset has no feature columns".into()));
        }
        Error::check_len("feature matrix", dim * labels.len(), features.len())?;
        if let Some((i, label)) = labels.iter().enumerate().find(|(_, l)| **l >= classes) {
            return Err(Error::Data(alloc::format!(
                "sample {i} has label {label} but there are only {classes} classes"
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(alloc::format!(
                "sample {} feature {} is not finite",
                i / dim,
                i % dim
            )));
        }
        Ok(Self {
            dim,
            features,
            labels,
            classes,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], usize)> + '_ {
        self.features
            .chunks_exact(self.dim)
            .zip(self.labels.iter().copied())
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    fn subset(&self, indices: &[usize], provenance: String) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::new(self.dim, features, labels, self.classes, provenance)
    }
}

fn noise(std: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, std).map_err(|e| Error::Config(alloc::format!("noise level {std}: {e}")))
}

fn check_sizes(n_samples: usize, noise_std: f64) -> Result<()> {
    if n_samples < 2 {
        return Err(Error::Config(alloc::format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(Error::Config(alloc::format!(
            "noise standard deviation must be finite and non-negative, got {noise_std}"
        )));
    }
    Ok(())
}

/// Two interleaved half circles. Class 0 lies on `(cos t, sin t)`, class 1 on
/// `(1 − cos t, 0.5 − sin t)`, `t ~ U[0, π]`; class 0 gets the extra point when
/// `n_samples` is odd.
pub fn make_moons(n_samples: usize, noise_std: f64, seed: u64) -> Result<Dataset> {
    check_sizes(n_samples, noise_std)?;
    let mut rng = stream(seed, Stream::Data);
    let jitter = noise(noise_std)?;
    let per_class = [n_samples - n_samples / 2, n_samples / 2];
    let mut features = Vec::with_capacity(2 * n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    for (class, &count) in per_class.iter().enumerate() {
        for _ in 0..count {
            let t = rng.random_range(0.0..=PI);
            let (s, c) = libm::sincos(t);
            let (x, y) = if class == 0 {
                (c, s)
            } else {
                (1.0 - c, 0.5 - s)
            };
            features.push(x + jitter.sample(&mut rng));
            features.push(y + jitter.sample(&mut rng));
            labels.push(class);
        }
    }
    Dataset::new(
        2,
        features,
        labels,
        2,
        alloc::format!("moons(n={n_samples}, noise={noise_std}, seed={seed})"),
    )
}

/// Two interleaved spirals: radius `t`, angle `2π·turns·t + c·π` for class `c`,
/// `t ~ U(0, 1]`.
pub fn make_spirals(n_samples: usize, noise_std: f64, turns: f64, seed: u64) -> Result<Dataset> {
    check_sizes(n_samples, noise_std)?;
    if !(turns.is_finite() && turns > 0.0) {
        return Err(Error::Config(alloc::format!(
            "spiral turns must be positive, got {turns}"
        )));
    }
    let mut rng = stream(seed, Stream::Data);
    let jitter = noise(noise_std)?;
    let per_class = [n_samples - n_samples / 2, n_samples / 2];
    let mut features = Vec::with_capacity(2 * n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    for (class, &count) in per_class.iter().enumerate() {
        for _ in 0..count {
            let t = 1.0 - rng.random::<f64>();
            let angle = 2.0 * PI * turns * t + class as f64 * PI;
            let (s, c) = libm::sincos(angle);
            features.push(t * c + jitter.sample(&mut rng));
            features.push(t * s + jitter.sample(&mut rng));
            labels.push(class);
        }
    }
    Dataset::new(
        2,
        features,
        labels,
        2,
        alloc::format!("spirals(n={n_samples}, noise={noise_std}, turns={turns}, seed={seed})"),
    )
}

/// Stratified split: each class contributes `round(count · test_fraction)` samples to the
/// test set (at least one, and at least one left for training). Both halves keep the
/// original sample order.
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(alloc::format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = stream(seed, Stream::Split);
    let mut test_mask = vec![false; dataset.len()];
    for class in 0..dataset.classes() {
        let mut members: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.label(i) == class)
            .collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::Data(alloc::format!(
                "class {class} has {} member(s); a split needs at least 2",
                members.len()
            )));
        }
        let wanted = libm::round(members.len() as f64 * test_fraction) as usize;
        let n_test = wanted.clamp(1, members.len() - 1);
        members.shuffle(&mut rng);
        for &i in &members[..n_test] {
            test_mask[i] = true;
        }
    }
    let (test_idx, train_idx): (Vec<usize>, Vec<usize>) =
        (0..dataset.len()).partition(|&i| test_mask[i]);
    let train = dataset.subset(
        &train_idx,
        alloc::format!("{} [train]", dataset.provenance()),
    )?;
    let test = dataset.subset(&test_idx, alloc::format!("{} [test]", dataset.provenance()))?;
    Ok((train, test))
}

/// Per-feature affine map fitted on training data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Mean and population standard deviation of every column.
    pub fn fit(data: &Dataset) -> Result<Self> {
        let n = data.len() as f64;
        let mut mean = vec![0.0; data.dim()];
        for (row, _) in data.iter() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; data.dim()];
        for (row, _) in data.iter() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut std = Vec::with_capacity(data.dim());
        for (i, s) in var.into_iter().enumerate() {
            let sd = libm::sqrt(s / n);
            if sd.is_nan() || sd == 0.0 {
                return Err(Error::Data(alloc::format!(
                    "feature {i} has zero variance in the training data"
                )));
            }
            std.push(sd);
        }
        Ok(Self { mean, std })
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("standardizer input", self.mean.len(), row.len())?;
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        let mut features = Vec::with_capacity(data.features().len());
        for (row, _) in data.iter() {
            features.extend(self.transform_row(row)?);
        }
        Dataset::new(
            data.dim(),
            features,
            data.labels().to_vec(),
            data.classes(),
            data.provenance(),
        )
    }
}

/// Standardizes both sets with statistics of `train` only.
pub fn standardize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, Standardizer)> {
    let stats = Standardizer::fit(train)?;
    Ok((stats.transform(train)?, stats.transform(test)?, stats))
}
