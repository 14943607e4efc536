//! Fast self-checks: simulator against an independent dense-matrix oracle, norm and
//! inverse round trips, parameter-shift and full-model gradients against finite
//! differences, the all-Z degeneracy and the identity collapse.
//!
//! Each check returns its worst measured deviation; [`run_all`] compares them with the
//! tolerances below and prints one verdict line per check.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use sequent_core::ansatz::{self, input_jacobian, param_shift_grad};
use sequent_core::models::{identity_collapse_check, identity_collapse_gradient_check};
use sequent_core::neural::{Adam, AdamConfig};
use sequent_core::rng::{stream, Stream};
use sequent_core::{
    Activation, AnyModel, Axis, CircuitConfig, ClassicalBaseline, DenseLayer, DqcModel, Loss,
    Model, QuantumParams, SequentModel, StateVector,
};

use crate::error::{Error, Result};

pub const ORACLE_TOLERANCE: f64 = 1e-12;
pub const NORM_TOLERANCE: f64 = 1e-10;
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
pub const SHIFT_TOLERANCE: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-4;
pub const MODEL_RELATIVE_TOLERANCE: f64 = 1e-4;
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;
pub const COLLAPSE_TOLERANCE: f64 = 1e-12;

const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

/// Gate application used by the simulator checks; a faulty backend lets the harness
/// confirm that the oracle comparison catches real defects.
pub trait Backend: Sync {
    fn hadamard(&self, state: &mut StateVector, qubit: usize) -> Result<()>;
    fn rotate(&self, state: &mut StateVector, qubit: usize, axis: Axis, angle: f64) -> Result<()>;
    fn cnot(&self, state: &mut StateVector, control: usize, target: usize) -> Result<()>;
}

/// The simulator as shipped.
pub struct Reference;

impl Backend for Reference {
    fn hadamard(&self, state: &mut StateVector, qubit: usize) -> Result<()> {
        Ok(state.hadamard(qubit)?)
    }

    fn rotate(&self, state: &mut StateVector, qubit: usize, axis: Axis, angle: f64) -> Result<()> {
        Ok(state.rotate(qubit, axis, angle)?)
    }

    fn cnot(&self, state: &mut StateVector, control: usize, target: usize) -> Result<()> {
        Ok(state.cnot(control, target)?)
    }
}

/// Swaps control and target of every CNOT.
pub struct FlippedCnot;

impl Backend for FlippedCnot {
    fn hadamard(&self, state: &mut StateVector, qubit: usize) -> Result<()> {
        Reference.hadamard(state, qubit)
    }

    fn rotate(&self, state: &mut StateVector, qubit: usize, axis: Axis, angle: f64) -> Result<()> {
        Reference.rotate(state, qubit, axis, angle)
    }

    fn cnot(&self, state: &mut StateVector, control: usize, target: usize) -> Result<()> {
        Reference.cnot(state, target, control)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    R(usize, Axis, f64),
    Cnot(usize, usize),
}

impl Gate {
    pub fn inverse(self) -> Gate {
        match self {
            Gate::R(q, axis, angle) => Gate::R(q, axis, -angle),
            other => other,
        }
    }

    pub fn apply(self, backend: &dyn Backend, state: &mut StateVector) -> Result<()> {
        match self {
            Gate::H(q) => backend.hadamard(state, q),
            Gate::R(q, axis, angle) => backend.rotate(state, q, axis, angle),
            Gate::Cnot(c, t) => backend.cnot(state, c, t),
        }
    }
}

pub fn random_gate<R: Rng>(num_qubits: usize, rng: &mut R) -> Gate {
    let q = rng.random_range(0..num_qubits);
    match rng.random_range(0..3) {
        0 => Gate::H(q),
        1 => Gate::R(
            q,
            AXES[rng.random_range(0..3)],
            rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI),
        ),
        _ if num_qubits > 1 => {
            let t = (q + rng.random_range(1..num_qubits)) % num_qubits;
            Gate::Cnot(q, t)
        }
        _ => Gate::H(q),
    }
}

pub fn random_state<R: Rng>(num_qubits: usize, rng: &mut R) -> Result<StateVector> {
    let mut amps: Vec<Complex64> = (0..1usize << num_qubits)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(StateVector::from_amplitudes(amps)?)
}

type Matrix4 = [[Complex64; 4]; 4];

/// Dense two-qubit operators built straight from the gate definitions, basis index
/// `b0 + 2·b1`.
mod oracle {
    use super::*;

    fn zero() -> Matrix4 {
        [[Complex64::new(0.0, 0.0); 4]; 4]
    }

    fn single(gate: [[Complex64; 2]; 2], qubit: usize) -> Matrix4 {
        let other = 1 - qubit;
        let mut m = zero();
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                if (i >> other) & 1 == (j >> other) & 1 {
                    *entry = gate[(i >> qubit) & 1][(j >> qubit) & 1];
                }
            }
        }
        m
    }

    fn rotation(axis: Axis, angle: f64) -> [[Complex64; 2]; 2] {
        let c = Complex64::new((angle / 2.0).cos(), 0.0);
        let s = (angle / 2.0).sin();
        let o = Complex64::new(0.0, 0.0);
        match axis {
            Axis::X => [[c, Complex64::new(0.0, -s)], [Complex64::new(0.0, -s), c]],
            Axis::Y => [[c, Complex64::new(-s, 0.0)], [Complex64::new(s, 0.0), c]],
            Axis::Z => [
                [Complex64::from_polar(1.0, -angle / 2.0), o],
                [o, Complex64::from_polar(1.0, angle / 2.0)],
            ],
        }
    }

    pub fn matrix(gate: Gate) -> Matrix4 {
        match gate {
            Gate::H(q) => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                single([[h, h], [h, -h]], q)
            }
            Gate::R(q, axis, angle) => single(rotation(axis, angle), q),
            Gate::Cnot(c, t) => {
                let mut m = zero();
                // The CNOT permutation is its own inverse.
                for (i, row) in m.iter_mut().enumerate() {
                    let j = if (i >> c) & 1 == 1 { i ^ (1 << t) } else { i };
                    row[j] = Complex64::new(1.0, 0.0);
                }
                m
            }
        }
    }

    pub fn apply(m: &Matrix4, v: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (i, row) in m.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }
}

/// Largest elementwise deviation between the backend and the matrix-chain oracle over
/// `sequences` random 2-qubit sequences of length 1..=`max_len`.
pub fn oracle_deviation(
    backend: &dyn Backend,
    sequences: usize,
    max_len: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = stream(seed, Stream::Test);
    let mut worst = 0.0f64;
    for _ in 0..sequences {
        let start = random_state(2, &mut rng)?;
        let mut state = start.clone();
        let mut expected: [Complex64; 4] = start.amplitudes().try_into().expect("two qubits");
        let len = rng.random_range(1..=max_len);
        for _ in 0..len {
            let gate = random_gate(2, &mut rng);
            gate.apply(backend, &mut state)?;
            expected = oracle::apply(&oracle::matrix(gate), &expected);
        }
        for (a, b) in state.amplitudes().iter().zip(&expected) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// Largest `|‖ψ‖ − 1|` after random sequences of up to `max_len` gates.
pub fn norm_deviation(
    backend: &dyn Backend,
    num_qubits: usize,
    sequences: usize,
    max_len: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = stream(seed, Stream::Test);
    let mut worst = 0.0f64;
    for _ in 0..sequences {
        let mut state = StateVector::zero(num_qubits)?;
        let len = rng.random_range(1..=max_len);
        for _ in 0..len {
            random_gate(num_qubits, &mut rng).apply(backend, &mut state)?;
            worst = worst.max((state.norm() - 1.0).abs());
        }
    }
    Ok(worst)
}

/// Largest elementwise deviation after applying a random gate and then its inverse.
pub fn round_trip_deviation(
    backend: &dyn Backend,
    num_qubits: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = stream(seed, Stream::Test);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let start = random_state(num_qubits, &mut rng)?;
        let gate = random_gate(num_qubits, &mut rng);
        let mut state = start.clone();
        gate.apply(backend, &mut state)?;
        gate.inverse().apply(backend, &mut state)?;
        for (a, b) in state.amplitudes().iter().zip(start.amplitudes()) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

fn random_circuit<R: Rng>(rng: &mut R) -> Result<(CircuitConfig, Vec<f64>, QuantumParams)> {
    let eta = rng.random_range(1..=4);
    let depth = rng.random_range(0..=3);
    let sigma = rng.random_range(1..=eta);
    let config = CircuitConfig::with_axes(
        eta,
        depth,
        sigma,
        AXES[rng.random_range(0..3)],
        AXES[rng.random_range(0..3)],
    )?;
    let z = (0..eta).map(|_| rng.random_range(-3.0..3.0)).collect();
    let phi = (0..config.num_params())
        .map(|_| rng.random_range(-3.0..3.0))
        .collect();
    let params = QuantumParams::from_flat(&config, phi)?;
    Ok((config, z, params))
}

/// Largest deviation of parameter-shift gradients and input Jacobians from central
/// differences over `instances` random circuits with η ≤ 4, δ ≤ 3.
pub fn shift_rule_deviation(instances: usize, seed: u64) -> Result<f64> {
    let mut rng = stream(seed, Stream::Test);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let (config, z, params) = random_circuit(&mut rng)?;
        let grad = param_shift_grad(&z, &params, &config)?;
        for col in 0..config.num_params() {
            let mut plus = params.clone();
            plus.as_mut_slice()[col] += FD_STEP;
            let mut minus = params.clone();
            minus.as_mut_slice()[col] -= FD_STEP;
            let f_plus = ansatz::forward(&z, &plus, &config)?;
            let f_minus = ansatz::forward(&z, &minus, &config)?;
            for k in 0..config.num_outputs {
                let fd = (f_plus[k] - f_minus[k]) / (2.0 * FD_STEP);
                worst = worst.max((grad.get(k, col) - fd).abs());
            }
        }
        let jac = input_jacobian(&z, &params, &config)?;
        for q in 0..config.num_qubits {
            let mut plus = z.clone();
            plus[q] += FD_STEP;
            let mut minus = z.clone();
            minus[q] -= FD_STEP;
            let f_plus = ansatz::forward(&plus, &params, &config)?;
            let f_minus = ansatz::forward(&minus, &params, &config)?;
            for k in 0..config.num_outputs {
                let fd = (f_plus[k] - f_minus[k]) / (2.0 * FD_STEP);
                worst = worst.max((jac.get(k, q) - fd).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest `|a − b| / (tol·max(|a|, |b|) + 1e-8)` between analytic gradients `a` and central
/// differences `b` of the loss; at most 1 when every entry is within tolerance.
fn model_gradient_ratio<M: Model + Clone>(
    model: &M,
    x: &[f64],
    target: usize,
    loss: Loss,
    tol: f64,
) -> Result<f64> {
    let (_, grads) = model.backward(x, target, loss)?;
    let analytic = grads.flatten();
    let base = model.trainable_params();
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (i, a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[i] = base[i] + FD_STEP;
        probe.set_trainable_params(&p)?;
        let plus = loss.evaluate(&probe.forward(x)?, target)?.0;
        p[i] = base[i] - FD_STEP;
        probe.set_trainable_params(&p)?;
        let minus = loss.evaluate(&probe.forward(x)?, target)?.0;
        let fd = (plus - minus) / (2.0 * FD_STEP);
        let allowed = tol * a.abs().max(fd.abs()) + 1e-8;
        worst = worst.max((a - fd).abs() / allowed);
    }
    Ok(worst)
}

/// Small instances (η ≤ 3, δ ≤ 2) of every model and head mode under both losses.
pub fn model_instances(seed: u64) -> Result<Vec<AnyModel>> {
    let mut out = Vec::new();
    for (i, (eta, depth)) in [(2usize, 1usize), (3, 2)].into_iter().enumerate() {
        let s = seed.wrapping_add(i as u64);
        let full = CircuitConfig::with_axes(eta, depth, eta, Axis::Y, Axis::X)?;
        let narrow = CircuitConfig::new(eta, depth, 2)?;
        out.push(AnyModel::Classical(ClassicalBaseline::new(2, eta, 2, s)?));
        out.push(AnyModel::Dqc(DqcModel::new(2, full, 2, s)?));
        let surrogate = SequentModel::new(2, eta, 2, s)?;
        out.push(AnyModel::Sequent(surrogate.clone()));
        let mut rng = stream(s, Stream::Test);
        let params = QuantumParams::random(&narrow, 1.5, &mut rng);
        out.push(AnyModel::Sequent(SequentModel::with_quantum_head(
            surrogate.compression().clone(),
            narrow,
            params.clone(),
            false,
        )?));
        out.push(AnyModel::Sequent(SequentModel::with_quantum_head(
            surrogate.compression().clone(),
            narrow,
            params,
            true,
        )?));
    }
    Ok(out)
}

/// Worst tolerance ratio (see [`model_gradient_ratio`]) over every model instance,
/// `samples` random inputs each and both losses.
pub fn model_gradient_worst_ratio(samples: usize, tol: f64, seed: u64) -> Result<f64> {
    let mut rng = stream(seed, Stream::Test);
    let mut worst = 0.0f64;
    for model in model_instances(seed)? {
        for _ in 0..samples {
            let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let target = rng.random_range(0..2);
            for loss in [Loss::CrossEntropy, Loss::SquaredError] {
                worst = worst.max(model_gradient_ratio(&model, &x, target, loss, tol)?);
            }
        }
    }
    Ok(worst)
}

/// Largest |output| and |gradient entry| of all-Z circuits over `draws` random draws.
pub fn all_z_magnitude(draws: usize, seed: u64) -> Result<f64> {
    let mut rng = stream(seed, Stream::Test);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let eta = rng.random_range(1..=4);
        let depth = rng.random_range(0..=3);
        let config = CircuitConfig::with_axes(eta, depth, eta, Axis::Z, Axis::Z)?;
        let z: Vec<f64> = (0..eta).map(|_| rng.random_range(-3.0..3.0)).collect();
        let phi = (0..config.num_params())
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        let params = QuantumParams::from_flat(&config, phi)?;
        let outputs = ansatz::forward(&z, &params, &config)?;
        let grads = param_shift_grad(&z, &params, &config)?;
        let jac = input_jacobian(&z, &params, &config)?;
        for v in outputs.iter().chain(&grads.data).chain(&jac.data) {
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

/// Identity-stub DQC against the plain two-layer network at `n → η → k` shapes: largest
/// deviation in outputs and in loss gradients.
pub fn identity_collapse_deviation(
    n: usize,
    eta: usize,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = stream(seed, Stream::Test);
    let pre = DenseLayer::random(n, eta, Activation::ScaledTanh, &mut rng)?;
    let post = DenseLayer::random(eta, k, Activation::Identity, &mut rng)?;
    let inputs: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..n).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let labelled: Vec<(Vec<f64>, usize)> = inputs
        .iter()
        .map(|x| (x.clone(), rng.random_range(0..k)))
        .collect();
    let outputs = identity_collapse_check(&pre, &post, &inputs)?;
    let grads = identity_collapse_gradient_check(&pre, &post, &labelled, Loss::CrossEntropy)?;
    Ok(outputs.max(grads))
}

/// Bit-level change of θ after `steps` optimizer steps on a frozen SEQUENT model.
pub fn frozen_theta_changes(steps: usize, seed: u64) -> Result<usize> {
    let circuit = CircuitConfig::new(3, 2, 2)?;
    let mut model = SequentModel::new(2, 3, 2, seed)?.swap_surrogate_for_vqc(circuit, seed)?;
    let before = model.classical_params();
    let mut rng = stream(seed, Stream::Test);
    let mut params = model.trainable_params();
    let mut adam = Adam::new(AdamConfig::default(), params.len());
    for _ in 0..steps {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let (_, grads) = model.backward(&x, rng.random_range(0..2), Loss::CrossEntropy)?;
        if !grads.classical.is_empty() {
            return Err(Error::Verification(
                "frozen model produced classical gradients".into(),
            ));
        }
        adam.step(&mut params, &grads.flatten())?;
        model.set_trainable_params(&params)?;
    }
    let after = model.classical_params();
    Ok(before
        .iter()
        .zip(&after)
        .filter(|(a, b)| a.to_bits() != b.to_bits())
        .count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Simulator fault to inject; only for exercising the harness itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Fault {
    #[default]
    None,
    FlippedCnot,
}

fn within(measured: Result<f64>, tolerance: f64, what: &str) -> (bool, String) {
    match measured {
        Ok(v) if v <= tolerance => (true, format!("{what} {v:.3e} ≤ {tolerance:.0e}")),
        Ok(v) => (false, format!("{what} {v:.3e} exceeds {tolerance:.0e}")),
        Err(e) => (false, format!("error: {e}")),
    }
}

/// Runs every check; `report` receives each verdict as soon as it is known.
pub fn run_all(fault: Fault, mut report: impl FnMut(&CheckOutcome)) -> Vec<CheckOutcome> {
    let backend: &dyn Backend = match fault {
        Fault::None => &Reference,
        Fault::FlippedCnot => &FlippedCnot,
    };
    type Check<'a> = (&'static str, Box<dyn Fn() -> (bool, String) + 'a>);
    let checks: Vec<Check> = vec![
        (
            "simulator-oracle",
            Box::new(|| {
                within(
                    oracle_deviation(backend, 1000, 30, 1),
                    ORACLE_TOLERANCE,
                    "max amplitude deviation over 1000 two-qubit sequences",
                )
            }),
        ),
        (
            "norm-preservation",
            Box::new(|| {
                within(
                    norm_deviation(backend, 6, 200, 100, 2),
                    NORM_TOLERANCE,
                    "max norm drift over 200 six-qubit sequences of ≤ 100 gates",
                )
            }),
        ),
        (
            "gate-inverse",
            Box::new(|| {
                within(
                    round_trip_deviation(backend, 4, 500, 3),
                    ROUND_TRIP_TOLERANCE,
                    "max deviation after gate then inverse",
                )
            }),
        ),
        (
            "parameter-shift",
            Box::new(|| {
                within(
                    shift_rule_deviation(200, 4),
                    SHIFT_TOLERANCE,
                    "max deviation from central differences over 200 circuits",
                )
            }),
        ),
        (
            "model-gradients",
            Box::new(|| {
                within(
                    model_gradient_worst_ratio(10, MODEL_RELATIVE_TOLERANCE, 5),
                    1.0,
                    "worst error / (1e-4·max(|a|,|b|) + 1e-8)",
                )
            }),
        ),
        (
            "all-z-degeneracy",
            Box::new(|| {
                within(
                    all_z_magnitude(100, 6),
                    DEGENERACY_TOLERANCE,
                    "max |output| and |gradient| of all-Z circuits",
                )
            }),
        ),
        (
            "identity-collapse",
            Box::new(|| {
                within(
                    identity_collapse_deviation(2, 6, 2, 100, 7),
                    COLLAPSE_TOLERANCE,
                    "max stub-vs-network deviation",
                )
            }),
        ),
        (
            "freeze-integrity",
            Box::new(|| match frozen_theta_changes(100, 8) {
                Ok(0) => (true, "θ bit-identical after 100 steps".into()),
                Ok(n) => (false, format!("{n} frozen parameters changed")),
                Err(e) => (false, format!("error: {e}")),
            }),
        ),
    ];
    checks
        .into_iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = check();
            let outcome = CheckOutcome {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            };
            report(&outcome);
            outcome
        })
        .collect()
}

pub fn format_outcome(outcome: &CheckOutcome) -> String {
    format!(
        "{} {}: {} ({:.2}s)",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.name,
        outcome.detail,
        outcome.seconds
    )
}

/// Prints one line per check; fails naming every failed check.
pub fn cmd_verify(fault: Fault) -> Result<Vec<CheckOutcome>> {
    let outcomes = run_all(fault, |o| println!("{}", format_outcome(o)));
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name)
        .collect();
    if failed.is_empty() {
        Ok(outcomes)
    } else {
        Err(Error::Verification(failed.join(", ")))
    }
}
