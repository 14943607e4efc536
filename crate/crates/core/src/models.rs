//! The three architectures under comparison.
//!
//! * [`ClassicalBaseline`]: `L_{h→k} ∘ tanh-L_{n→h}`.
//! * [`DqcModel`]: a dressed quantum circuit `L_{η→k} ∘ VQC_φ ∘ L_{n→η}`, every part
//!   trained jointly. The circuit measures all η qubits.
//! * [`SequentModel`]: a classical compression layer `L_{n→η}` followed first by a
//!   classical surrogate head and, after [`SequentModel::swap_surrogate_for_vqc`], by a
//!   circuit that measures one qubit per class. Swapping freezes the compression layer.
//!
//! Every trainable scalar is either classical (θ) or quantum (φ). Freezing applies to θ
//! only, and a frozen model refuses classical parameter updates.

use alloc::vec::Vec;

use crate::ansatz::{self, CircuitConfig, QuantumParams};
use crate::error::{Error, Result};
use crate::neural::{Activation, DenseLayer, Loss};
use crate::rng::{stream, Stream};

/// Half-width of the uniform distribution used for fresh circuit angles.
pub const QUANTUM_INIT_HALF_WIDTH: f64 = 0.01;

/// Per-sample gradients split by partition. A frozen partition is empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradients {
    pub classical: Vec<f64>,
    pub quantum: Vec<f64>,
}

impl Gradients {
    /// Classical then quantum, the layout of [`Model::trainable_params`].
    pub fn flatten(mut self) -> Vec<f64> {
        self.classical.extend(self.quantum);
        self.classical
    }
}

pub trait Model {
    fn input_dim(&self) -> usize;

    fn num_classes(&self) -> usize;

    /// Class scores; the predicted class is the arg-max.
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Loss of one sample and the gradients of every unfrozen parameter.
    fn backward(&self, x: &[f64], target: usize, loss: Loss) -> Result<(f64, Gradients)>;

    /// Flat θ.
    fn classical_params(&self) -> Vec<f64>;

    /// Flat φ.
    fn quantum_params(&self) -> Vec<f64>;

    fn set_classical_params(&mut self, flat: &[f64]) -> Result<()>;

    fn set_quantum_params(&mut self, flat: &[f64]) -> Result<()>;

    fn classical_frozen(&self) -> bool {
        false
    }

    /// Unfrozen θ followed by φ.
    fn trainable_params(&self) -> Vec<f64> {
        let mut out = if self.classical_frozen() {
            Vec::new()
        } else {
            self.classical_params()
        };
        out.extend(self.quantum_params());
        out
    }

    fn num_trainable(&self) -> usize {
        self.trainable_params().len()
    }

    fn set_trainable_params(&mut self, flat: &[f64]) -> Result<()> {
        Error::check_len("trainable parameters", self.num_trainable(), flat.len())?;
        let split = if self.classical_frozen() {
            0
        } else {
            self.classical_params().len()
        };
        let (classical, quantum) = flat.split_at(split);
        if !self.classical_frozen() {
            self.set_classical_params(classical)?;
        }
        if !quantum.is_empty() {
            self.set_quantum_params(quantum)?;
        }
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }
}

/// Index of the largest score; the first one wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

fn concat(a: &DenseLayer, b: &DenseLayer) -> Vec<f64> {
    let mut out = a.params();
    out.extend(b.params());
    out
}

fn set_concat(a: &mut DenseLayer, b: &mut DenseLayer, flat: &[f64]) -> Result<()> {
    Error::check_len(
        "classical parameters",
        a.num_params() + b.num_params(),
        flat.len(),
    )?;
    let (first, second) = flat.split_at(a.num_params());
    a.set_params(first)?;
    b.set_params(second)
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn require_qubits_for_classes(num_qubits: usize, classes: usize) -> Result<()> {
    if num_qubits < classes {
        return Err(Error::Config(alloc::format!(
            "{classes} classes need at least {classes} qubits, got {num_qubits}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalBaseline {
    hidden: DenseLayer,
    output: DenseLayer,
}

impl ClassicalBaseline {
    /// `n → hidden_width` with tanh, then `hidden_width → classes` linear.
    pub fn new(input_dim: usize, hidden_width: usize, classes: usize, seed: u64) -> Result<Self> {
        let mut rng = stream(seed, Stream::ClassicalInit);
        let hidden = DenseLayer::random(input_dim, hidden_width, Activation::Tanh, &mut rng)?;
        let output = DenseLayer::random(hidden_width, classes, Activation::Identity, &mut rng)?;
        Self::from_layers(hidden, output)
    }

    /// Any two chained layers; used by the identity-collapse comparison.
    pub fn from_layers(hidden: DenseLayer, output: DenseLayer) -> Result<Self> {
        Error::check_len("hidden→output width", hidden.out_dim(), output.in_dim())?;
        Ok(Self { hidden, output })
    }

    pub fn hidden(&self) -> &DenseLayer {
        &self.hidden
    }

    pub fn output(&self) -> &DenseLayer {
        &self.output
    }

    /// Gradients of both layers (weights then bias, hidden layer first).
    fn layer_grads(&self, x: &[f64], target: usize, loss: Loss) -> Result<(f64, Vec<f64>)> {
        let h = self.hidden.forward(x)?;
        let logits = self.output.forward(&h)?;
        let (value, dlogits) = loss.evaluate(&logits, target)?;
        let out = self.output.backward(&h, &dlogits)?;
        let hid = self.hidden.backward(x, &out.input)?;
        let mut grads = hid.flat_params();
        grads.extend(out.flat_params());
        Ok((value, grads))
    }
}

impl Model for ClassicalBaseline {
    fn input_dim(&self) -> usize {
        self.hidden.in_dim()
    }

    fn num_classes(&self) -> usize {
        self.output.out_dim()
    }

    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.output.forward(&self.hidden.forward(x)?)
    }

    fn backward(&self, x: &[f64], target: usize, loss: Loss) -> Result<(f64, Gradients)> {
        let (value, classical) = self.layer_grads(x, target, loss)?;
        check_finite(&classical, "classical gradients")?;
        Ok((
            value,
            Gradients {
                classical,
                quantum: Vec::new(),
            },
        ))
    }

    fn classical_params(&self) -> Vec<f64> {
        concat(&self.hidden, &self.output)
    }

    fn quantum_params(&self) -> Vec<f64> {
        Vec::new()
    }

    fn set_classical_params(&mut self, flat: &[f64]) -> Result<()> {
        set_concat(&mut self.hidden, &mut self.output, flat)
    }

    fn set_quantum_params(&mut self, flat: &[f64]) -> Result<()> {
        Error::check_len("quantum parameters", 0, flat.len())
    }
}

/// The block sitting between the two dressing layers of a DQC.
pub trait QuantumBlock {
    fn outputs(&self, z: &[f64]) -> Result<Vec<f64>>;

    /// `(∂L/∂z, ∂L/∂φ)` given `∂L/∂outputs`.
    fn pullback(&self, z: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;
}

/// A variational circuit with fixed angles.
#[derive(Debug, Clone, Copy)]
pub struct Circuit<'a> {
    pub config: &'a CircuitConfig,
    pub params: &'a QuantumParams,
}

impl QuantumBlock for Circuit<'_> {
    fn outputs(&self, z: &[f64]) -> Result<Vec<f64>> {
        ansatz::forward(z, self.params, self.config)
    }

    fn pullback(&self, z: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dz = ansatz::input_jacobian(z, self.params, self.config)?.vjp(upstream)?;
        let dphi = ansatz::param_shift_grad(z, self.params, self.config)?.vjp(upstream)?;
        Ok((dz, dphi))
    }
}

/// `z ↦ z`, standing in for the circuit in the identity-collapse comparison.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityBlock;

impl QuantumBlock for IdentityBlock {
    fn outputs(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(z.to_vec())
    }

    fn pullback(&self, _z: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((upstream.to_vec(), Vec::new()))
    }
}

fn dressed_forward<B: QuantumBlock>(
    pre: &DenseLayer,
    block: &B,
    post: &DenseLayer,
    x: &[f64],
) -> Result<Vec<f64>> {
    post.forward(&block.outputs(&pre.forward(x)?)?)
}

/// Loss, then gradients `(pre ++ post, φ)`.
fn dressed_backward<B: QuantumBlock>(
    pre: &DenseLayer,
    block: &B,
    post: &DenseLayer,
    x: &[f64],
    target: usize,
    loss: Loss,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let z = pre.forward(x)?;
    let q = block.outputs(&z)?;
    let logits = post.forward(&q)?;
    let (value, dlogits) = loss.evaluate(&logits, target)?;
    let post_grads = post.backward(&q, &dlogits)?;
    let (dz, dphi) = block.pullback(&z, &post_grads.input)?;
    let pre_grads = pre.backward(x, &dz)?;
    let mut classical = pre_grads.flat_params();
    classical.extend(post_grads.flat_params());
    Ok((value, classical, dphi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DqcModel {
    pre: DenseLayer,
    circuit: CircuitConfig,
    quantum: QuantumParams,
    post: DenseLayer,
}

impl DqcModel {
    /// `circuit.num_outputs` must equal `circuit.num_qubits`.
    pub fn new(
        input_dim: usize,
        circuit: CircuitConfig,
        classes: usize,
        seed: u64,
    ) -> Result<Self> {
        circuit.validate()?;
        if circuit.num_outputs != circuit.num_qubits {
            return Err(Error::Config(alloc::format!(
                "a dressed circuit measures all {} qubits, configured for {}",
                circuit.num_qubits,
                circuit.num_outputs
            )));
        }
        require_qubits_for_classes(circuit.num_qubits, classes)?;
        let mut rng = stream(seed, Stream::ClassicalInit);
        let pre = DenseLayer::random(
            input_dim,
            circuit.num_qubits,
            Activation::ScaledTanh,
            &mut rng,
        )?;
        let post = DenseLayer::random(circuit.num_qubits, classes, Activation::Identity, &mut rng)?;
        let quantum = QuantumParams::random(
            &circuit,
            QUANTUM_INIT_HALF_WIDTH,
            &mut stream(seed, Stream::QuantumInit),
        );
        Ok(Self {
            pre,
            circuit,
            quantum,
            post,
        })
    }

    /// Reassembles a model from its layers and angles, as restored from a snapshot.
    pub fn from_parts(
        pre: DenseLayer,
        circuit: CircuitConfig,
        quantum: QuantumParams,
        post: DenseLayer,
    ) -> Result<Self> {
        circuit.validate()?;
        if circuit.num_outputs != circuit.num_qubits {
            return Err(Error::Config(alloc::format!(
                "a dressed circuit measures all {} qubits, configured for {}",
                circuit.num_qubits,
                circuit.num_outputs
            )));
        }
        Error::check_len("pre→circuit width", circuit.num_qubits, pre.out_dim())?;
        Error::check_len("circuit→post width", circuit.num_qubits, post.in_dim())?;
        require_qubits_for_classes(circuit.num_qubits, post.out_dim())?;
        quantum.check(&circuit)?;
        Ok(Self {
            pre,
            circuit,
            quantum,
            post,
        })
    }

    pub fn circuit(&self) -> &CircuitConfig {
        &self.circuit
    }

    pub fn quantum(&self) -> &QuantumParams {
        &self.quantum
    }

    pub fn pre(&self) -> &DenseLayer {
        &self.pre
    }

    pub fn post(&self) -> &DenseLayer {
        &self.post
    }

    fn block(&self) -> Circuit<'_> {
        Circuit {
            config: &self.circuit,
            params: &self.quantum,
        }
    }
}

impl Model for DqcModel {
    fn input_dim(&self) -> usize {
        self.pre.in_dim()
    }

    fn num_classes(&self) -> usize {
        self.post.out_dim()
    }

    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        dressed_forward(&self.pre, &self.block(), &self.post, x)
    }

    fn backward(&self, x: &[f64], target: usize, loss: Loss) -> Result<(f64, Gradients)> {
        let (value, classical, quantum) =
            dressed_backward(&self.pre, &self.block(), &self.post, x, target, loss)?;
        check_finite(&classical, "classical gradients")?;
        check_finite(&quantum, "quantum gradients")?;
        Ok((value, Gradients { classical, quantum }))
    }

    fn classical_params(&self) -> Vec<f64> {
        concat(&self.pre, &self.post)
    }

    fn quantum_params(&self) -> Vec<f64> {
        self.quantum.as_slice().to_vec()
    }

    fn set_classical_params(&mut self, flat: &[f64]) -> Result<()> {
        set_concat(&mut self.pre, &mut self.post, flat)
    }

    fn set_quantum_params(&mut self, flat: &[f64]) -> Result<()> {
        self.quantum = QuantumParams::from_flat(&self.circuit, flat.to_vec())?;
        Ok(())
    }
}

/// Which head a [`SequentModel`] currently carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum HeadMode {
    Surrogate,
    Quantum,
}

#[derive(Debug, Clone, PartialEq)]
enum Head {
    Surrogate(DenseLayer),
    Quantum {
        circuit: CircuitConfig,
        params: QuantumParams,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentModel {
    compression: DenseLayer,
    head: Head,
    frozen_classical: bool,
}

impl SequentModel {
    /// Compression `n → η` (scaled tanh) with a linear surrogate head `η → classes`.
    pub fn new(input_dim: usize, num_qubits: usize, classes: usize, seed: u64) -> Result<Self> {
        require_qubits_for_classes(num_qubits, classes)?;
        let mut rng = stream(seed, Stream::ClassicalInit);
        let compression =
            DenseLayer::random(input_dim, num_qubits, Activation::ScaledTanh, &mut rng)?;
        let surrogate = DenseLayer::random(num_qubits, classes, Activation::Identity, &mut rng)?;
        Ok(Self {
            compression,
            head: Head::Surrogate(surrogate),
            frozen_classical: false,
        })
    }

    /// A model still carrying its surrogate head, as restored from a snapshot.
    pub fn with_surrogate_head(compression: DenseLayer, surrogate: DenseLayer) -> Result<Self> {
        Error::check_len(
            "compression→surrogate width",
            compression.out_dim(),
            surrogate.in_dim(),
        )?;
        require_qubits_for_classes(compression.out_dim(), surrogate.out_dim())?;
        Ok(Self {
            compression,
            head: Head::Surrogate(surrogate),
            frozen_classical: false,
        })
    }

    /// A model already carrying a circuit head, as restored from a snapshot.
    pub fn with_quantum_head(
        compression: DenseLayer,
        circuit: CircuitConfig,
        params: QuantumParams,
        frozen_classical: bool,
    ) -> Result<Self> {
        circuit.validate()?;
        Error::check_len(
            "compression→circuit width",
            circuit.num_qubits,
            compression.out_dim(),
        )?;
        params.check(&circuit)?;
        Ok(Self {
            compression,
            head: Head::Quantum { circuit, params },
            frozen_classical,
        })
    }

    pub fn mode(&self) -> HeadMode {
        match self.head {
            Head::Surrogate(_) => HeadMode::Surrogate,
            Head::Quantum { .. } => HeadMode::Quantum,
        }
    }

    pub fn compression(&self) -> &DenseLayer {
        &self.compression
    }

    pub fn circuit(&self) -> Option<&CircuitConfig> {
        match &self.head {
            Head::Quantum { circuit, .. } => Some(circuit),
            Head::Surrogate(_) => None,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.compression.out_dim()
    }

    pub fn surrogate(&self) -> Option<&DenseLayer> {
        match &self.head {
            Head::Surrogate(layer) => Some(layer),
            Head::Quantum { .. } => None,
        }
    }

    pub fn quantum(&self) -> Option<&QuantumParams> {
        match &self.head {
            Head::Quantum { params, .. } => Some(params),
            Head::Surrogate(_) => None,
        }
    }

    /// Replaces the surrogate head with a circuit measuring one qubit per class and
    /// freezes the compression layer. The compression weights are moved, not copied.
    pub fn swap_surrogate_for_vqc(self, circuit: CircuitConfig, seed: u64) -> Result<Self> {
        let surrogate = match &self.head {
            Head::Surrogate(layer) => layer,
            Head::Quantum { .. } => {
                return Err(Error::Config("model already carries a quantum head".into()))
            }
        };
        circuit.validate()?;
        if circuit.num_outputs != surrogate.out_dim() {
            return Err(Error::Config(alloc::format!(
                "circuit measures {} qubits but the task has {} classes",
                circuit.num_outputs,
                surrogate.out_dim()
            )));
        }
        if circuit.num_qubits != self.compression.out_dim() {
            return Err(Error::Config(alloc::format!(
                "circuit has {} qubits but the compression layer emits {} angles",
                circuit.num_qubits,
                self.compression.out_dim()
            )));
        }
        let params = QuantumParams::random(
            &circuit,
            QUANTUM_INIT_HALF_WIDTH,
            &mut stream(seed, Stream::QuantumInit),
        );
        Ok(Self {
            compression: self.compression,
            head: Head::Quantum { circuit, params },
            frozen_classical: true,
        })
    }
}

impl Model for SequentModel {
    fn input_dim(&self) -> usize {
        self.compression.in_dim()
    }

    fn num_classes(&self) -> usize {
        match &self.head {
            Head::Surrogate(layer) => layer.out_dim(),
            Head::Quantum { circuit, .. } => circuit.num_outputs,
        }
    }

    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.compression.forward(x)?;
        match &self.head {
            Head::Surrogate(layer) => layer.forward(&z),
            Head::Quantum { circuit, params } => ansatz::forward(&z, params, circuit),
        }
    }

    fn backward(&self, x: &[f64], target: usize, loss: Loss) -> Result<(f64, Gradients)> {
        let z = self.compression.forward(x)?;
        let grads = match &self.head {
            Head::Surrogate(layer) => {
                let logits = layer.forward(&z)?;
                let (value, dlogits) = loss.evaluate(&logits, target)?;
                let head = layer.backward(&z, &dlogits)?;
                let comp = self.compression.backward(x, &head.input)?;
                let mut classical = comp.flat_params();
                classical.extend(head.flat_params());
                (
                    value,
                    Gradients {
                        classical,
                        quantum: Vec::new(),
                    },
                )
            }
            Head::Quantum { circuit, params } => {
                let logits = ansatz::forward(&z, params, circuit)?;
                let (value, dlogits) = loss.evaluate(&logits, target)?;
                let quantum = ansatz::param_shift_grad(&z, params, circuit)?.vjp(&dlogits)?;
                let classical = if self.frozen_classical {
                    Vec::new()
                } else {
                    let dz = ansatz::input_jacobian(&z, params, circuit)?.vjp(&dlogits)?;
                    self.compression.backward(x, &dz)?.flat_params()
                };
                (value, Gradients { classical, quantum })
            }
        };
        check_finite(&grads.1.classical, "classical gradients")?;
        check_finite(&grads.1.quantum, "quantum gradients")?;
        Ok(grads)
    }

    fn classical_params(&self) -> Vec<f64> {
        match &self.head {
            Head::Surrogate(layer) => concat(&self.compression, layer),
            Head::Quantum { .. } => self.compression.params(),
        }
    }

    fn quantum_params(&self) -> Vec<f64> {
        match &self.head {
            Head::Surrogate(_) => Vec::new(),
            Head::Quantum { params, .. } => params.as_slice().to_vec(),
        }
    }

    fn set_classical_params(&mut self, flat: &[f64]) -> Result<()> {
        if self.frozen_classical {
            return Err(Error::Config("classical parameters are frozen".into()));
        }
        match &mut self.head {
            Head::Surrogate(layer) => set_concat(&mut self.compression, layer, flat),
            Head::Quantum { .. } => self.compression.set_params(flat),
        }
    }

    fn set_quantum_params(&mut self, flat: &[f64]) -> Result<()> {
        match &mut self.head {
            Head::Surrogate(_) => Error::check_len("quantum parameters", 0, flat.len()),
            Head::Quantum { circuit, params } => {
                *params = QuantumParams::from_flat(circuit, flat.to_vec())?;
                Ok(())
            }
        }
    }

    fn classical_frozen(&self) -> bool {
        self.frozen_classical
    }
}

/// Any of the three architectures.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Classical(ClassicalBaseline),
    Dqc(DqcModel),
    Sequent(SequentModel),
}

macro_rules! delegate {
    ($self:expr, $m:ident => $body:expr) => {
        match $self {
            AnyModel::Classical($m) => $body,
            AnyModel::Dqc($m) => $body,
            AnyModel::Sequent($m) => $body,
        }
    };
}

impl Model for AnyModel {
    fn input_dim(&self) -> usize {
        delegate!(self, m => m.input_dim())
    }

    fn num_classes(&self) -> usize {
        delegate!(self, m => m.num_classes())
    }

    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        delegate!(self, m => m.forward(x))
    }

    fn backward(&self, x: &[f64], target: usize, loss: Loss) -> Result<(f64, Gradients)> {
        delegate!(self, m => m.backward(x, target, loss))
    }

    fn classical_params(&self) -> Vec<f64> {
        delegate!(self, m => m.classical_params())
    }

    fn quantum_params(&self) -> Vec<f64> {
        delegate!(self, m => m.quantum_params())
    }

    fn set_classical_params(&mut self, flat: &[f64]) -> Result<()> {
        delegate!(self, m => m.set_classical_params(flat))
    }

    fn set_quantum_params(&mut self, flat: &[f64]) -> Result<()> {
        delegate!(self, m => m.set_quantum_params(flat))
    }

    fn classical_frozen(&self) -> bool {
        delegate!(self, m => m.classical_frozen())
    }
}

/// Runs a dressed model whose circuit is the identity stub and the plain two-layer
/// network `post ∘ pre` over `samples`; returns the largest absolute output difference.
pub fn identity_collapse_check(
    pre: &DenseLayer,
    post: &DenseLayer,
    samples: &[Vec<f64>],
) -> Result<f64> {
    let network = ClassicalBaseline::from_layers(pre.clone(), post.clone())?;
    let mut worst = 0.0f64;
    for x in samples {
        let stub = dressed_forward(pre, &IdentityBlock, post, x)?;
        let plain = network.forward(x)?;
        for (a, b) in stub.iter().zip(&plain) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Same comparison for the classical gradients of a labelled sample set.
pub fn identity_collapse_gradient_check(
    pre: &DenseLayer,
    post: &DenseLayer,
    samples: &[(Vec<f64>, usize)],
    loss: Loss,
) -> Result<f64> {
    let network = ClassicalBaseline::from_layers(pre.clone(), post.clone())?;
    let mut worst = 0.0f64;
    for (x, target) in samples {
        let (stub_loss, stub, dphi) =
            dressed_backward(pre, &IdentityBlock, post, x, *target, loss)?;
        debug_assert!(dphi.is_empty());
        let (plain_loss, plain) = network.layer_grads(x, *target, loss)?;
        worst = worst.max((stub_loss - plain_loss).abs());
        for (a, b) in stub.iter().zip(&plain) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}
