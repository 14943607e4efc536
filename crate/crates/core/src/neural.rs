//! Dense layers, losses and the Adam optimizer.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Activation {
    Identity,
    Tanh,
    /// `π/2 · tanh(x)`, which keeps outputs inside the open interval (−π/2, π/2).
    ScaledTanh,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => libm::tanh(x),
            Activation::ScaledTanh => FRAC_PI_2 * libm::tanh(x),
        }
    }

    /// Derivative with respect to the pre-activation `x`.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => {
                let t = libm::tanh(x);
                1.0 - t * t
            }
            Activation::ScaledTanh => {
                let t = libm::tanh(x);
                FRAC_PI_2 * (1.0 - t * t)
            }
        }
    }
}

/// Fully connected layer `activation(W·x + b)` with `W` stored row-major (`out × in`).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

/// Gradients of one layer for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub input: Vec<f64>,
}

impl LayerGrads {
    /// Weight gradients followed by bias gradients, matching [`DenseLayer::params`].
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = self.weights.clone();
        out.extend_from_slice(&self.bias);
        out
    }
}

impl DenseLayer {
    pub fn from_parts(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Config(alloc::format!(
                "dense layer needs positive dimensions, got {in_dim}→{out_dim}"
            )));
        }
        Error::check_len("layer weights", in_dim * out_dim, weights.len())?;
        Error::check_len("layer bias", out_dim, bias.len())?;
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("layer parameters"));
        }
        Ok(Self {
            in_dim,
            out_dim,
            weights,
            bias,
            activation,
        })
    }

    /// Weights uniform in ±1/√in_dim, biases zero.
    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if in_dim == 0 {
            return Err(Error::Config(
                "dense layer needs a positive input dimension".into(),
            ));
        }
        let bound = 1.0 / libm::sqrt(in_dim as f64);
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self::from_parts(in_dim, out_dim, weights, vec![0.0; out_dim], activation)
    }

    pub fn identity(dim: usize, activation: Activation) -> Result<Self> {
        let mut weights = vec![0.0; dim * dim];
        for i in 0..dim {
            weights[i * dim + i] = 1.0;
        }
        Self::from_parts(dim, dim, weights, vec![0.0; dim], activation)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Weights (row-major) followed by biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = self.weights.clone();
        out.extend_from_slice(&self.bias);
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        Error::check_len("layer parameters", self.num_params(), flat.len())?;
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("layer parameters"));
        }
        let (w, b) = flat.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
        Ok(())
    }

    fn pre_activation(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("layer input", self.in_dim, x.len())?;
        Ok(self
            .weights
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b)
            .collect())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.pre_activation(x)?;
        for v in &mut out {
            *v = self.activation.apply(*v);
        }
        Ok(out)
    }

    /// Chain rule through the layer given `∂L/∂output`.
    pub fn backward(&self, x: &[f64], upstream: &[f64]) -> Result<LayerGrads> {
        Error::check_len("layer upstream gradient", self.out_dim, upstream.len())?;
        let pre = self.pre_activation(x)?;
        let delta: Vec<f64> = pre
            .iter()
            .zip(upstream)
            .map(|(p, u)| u * self.activation.derivative(*p))
            .collect();
        let mut weights = vec![0.0; self.weights.len()];
        let mut input = vec![0.0; self.in_dim];
        for (j, d) in delta.iter().enumerate() {
            let row = &self.weights[j * self.in_dim..(j + 1) * self.in_dim];
            let grow = &mut weights[j * self.in_dim..(j + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grow[i] = d * x[i];
                input[i] += d * row[i];
            }
        }
        Ok(LayerGrads {
            weights,
            bias: delta,
            input,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Loss {
    #[default]
    CrossEntropy,
    SquaredError,
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::CrossEntropy => "cross-entropy",
            Loss::SquaredError => "squared-error",
        })
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross-entropy" | "ce" => Ok(Loss::CrossEntropy),
            "squared-error" | "mse" => Ok(Loss::SquaredError),
            other => Err(Error::Config(alloc::format!(
                "unknown loss {other:?} (expected cross-entropy or squared-error)"
            ))),
        }
    }
}

impl Loss {
    /// Loss value and its gradient with respect to the logits.
    pub fn evaluate(self, logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
        match self {
            Loss::CrossEntropy => softmax_cross_entropy(logits, target),
            Loss::SquaredError => squared_error(logits, target),
        }
    }
}

fn check_target(logits: &[f64], target: usize) -> Result<()> {
    if logits.is_empty() {
        return Err(Error::Config("loss over empty logits".into()));
    }
    if target >= logits.len() {
        return Err(Error::Data(alloc::format!(
            "target class {target} out of range for {} logits",
            logits.len()
        )));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logits"));
    }
    Ok(())
}

/// `−log softmax(logits)[target]` and `softmax(logits) − onehot(target)`.
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    check_target(logits, target)?;
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
    let sum: f64 = exps.iter().sum();
    let loss = libm::log(sum) + max - logits[target];
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[target] -= 1.0;
    Ok((loss.max(0.0), grad))
}

/// `Σ_k (logit_k − onehot_k)²` and its gradient.
pub fn squared_error(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    check_target(logits, target)?;
    let mut loss = 0.0;
    let grad = logits
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let diff = l - if k == target { 1.0 } else { 0.0 };
            loss += diff * diff;
            2.0 * diff
        })
        .collect();
    Ok((loss, grad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate.is_finite()
            && self.learning_rate >= 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(alloc::format!(
                "invalid optimizer settings {self:?}"
            )))
        }
    }
}

/// Adam with bias-corrected moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    config: AdamConfig,
    first: Vec<f64>,
    second: Vec<f64>,
    steps: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, num_params: usize) -> Self {
        Self {
            config,
            first: vec![0.0; num_params],
            second: vec![0.0; num_params],
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        Error::check_len("optimizer parameters", self.first.len(), params.len())?;
        Error::check_len("optimizer gradients", self.first.len(), grads.len())?;
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::Divergence(alloc::format!(
                "gradient component {i} is {} at optimizer step {}",
                grads[i],
                self.steps + 1
            )));
        }
        self.steps += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.steps as i32;
        let correct1 = 1.0 - libm::pow(beta1, t as f64);
        let correct2 = 1.0 - libm::pow(beta2, t as f64);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / correct1;
            let v_hat = *v / correct2;
            *p -= learning_rate * m_hat / (libm::sqrt(v_hat) + epsilon);
        }
        Ok(())
    }
}
