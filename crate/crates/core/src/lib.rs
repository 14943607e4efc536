//! Hybrid quantum-classical classifiers on a dense statevector simulator.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! * [`statevector`]: η-qubit registers with H, RX/RY/RZ and CNOT gates and Pauli-Z readout.
//! * [`ansatz`]: the embed / entangle / measure variational circuit and its parameter-shift
//!   derivatives with respect to both the trainable angles and the embedded inputs.
//! * [`neural`]: dense layers, losses and the Adam optimizer.
//! * [`models`]: the classical baseline, the dressed quantum circuit (DQC) and the
//!   sequential compression + circuit model (SEQUENT).
//! * [`training`]: the training regimes, evaluation and parameter digests.
//! * [`data`]: moons / spirals generators, stratified splitting and standardization.
//!
//! Basis-state indexing: qubit `q` is bit `q` of the amplitude index (qubit 0 is the
//! least significant bit).
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ansatz;
pub mod data;
pub mod error;
pub mod models;
pub mod neural;
pub mod rng;
pub mod statevector;
pub mod training;

pub use ansatz::{Axis, CircuitConfig, QuantumParams};
pub use data::Dataset;
pub use error::{Error, Result};
pub use models::{AnyModel, ClassicalBaseline, DqcModel, HeadMode, Model, SequentModel};
pub use neural::{Activation, AdamConfig, DenseLayer, Loss};
pub use statevector::StateVector;
pub use training::{TrainConfig, TrainingReport};
