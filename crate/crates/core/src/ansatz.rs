//! The variational classifier circuit and its derivatives.
//!
//! A circuit on η qubits is
//!
//! ```text
//! measure_σ ∘ entangle(φ_δ) ∘ … ∘ entangle(φ_1) ∘ embed(z)
//! ```
//!
//! where `embed` puts every qubit into |+⟩ with a Hadamard and then rotates qubit `q` by
//! `z_q` about the embedding axis, and each `entangle` layer is an open CNOT chain
//! `q → q+1` followed by one trainable rotation per qubit. The readout is ⟨Z⟩ of qubits
//! `0..σ`.
//!
//! Every trainable angle and every embedded input drives exactly one Pauli rotation, so
//! both derivative families follow the two-term shift rule
//! `∂f/∂θ = (f(θ + π/2) − f(θ − π/2)) / 2`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::error::{Error, Result};
pub use crate::statevector::Axis;
use crate::statevector::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CircuitConfig {
    pub num_qubits: usize,
    pub depth: usize,
    pub num_outputs: usize,
    pub embed_axis: Axis,
    pub entangle_axis: Axis,
}

impl CircuitConfig {
    /// A circuit with Y-axis embedding and Y-axis trainable rotations.
    ///
    /// Z on both axes is constructible through [`CircuitConfig::with_axes`] but measures a
    /// constant 0 on every qubit (see the `all_z_outputs_vanish` test).
    pub fn new(num_qubits: usize, depth: usize, num_outputs: usize) -> Result<Self> {
        Self::with_axes(num_qubits, depth, num_outputs, Axis::Y, Axis::Y)
    }

    pub fn with_axes(
        num_qubits: usize,
        depth: usize,
        num_outputs: usize,
        embed_axis: Axis,
        entangle_axis: Axis,
    ) -> Result<Self> {
        let config = Self {
            num_qubits,
            depth,
            num_outputs,
            embed_axis,
            entangle_axis,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_qubits > crate::statevector::MAX_QUBITS {
            return Err(Error::Config(alloc::format!(
                "circuit needs 1..={} qubits, got {}",
                crate::statevector::MAX_QUBITS,
                self.num_qubits
            )));
        }
        if self.num_outputs == 0 || self.num_outputs > self.num_qubits {
            return Err(Error::Config(alloc::format!(
                "circuit measures {} qubits but has only {}",
                self.num_outputs,
                self.num_qubits
            )));
        }
        Ok(())
    }

    /// Number of trainable angles, δ·η.
    pub fn num_params(&self) -> usize {
        self.depth * self.num_qubits
    }
}

/// Trainable rotation angles, one per qubit per entangling layer, stored layer-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumParams {
    depth: usize,
    num_qubits: usize,
    angles: Vec<f64>,
}

impl QuantumParams {
    pub fn zeros(config: &CircuitConfig) -> Self {
        Self {
            depth: config.depth,
            num_qubits: config.num_qubits,
            angles: vec![0.0; config.num_params()],
        }
    }

    pub fn from_flat(config: &CircuitConfig, angles: Vec<f64>) -> Result<Self> {
        Error::check_len("quantum parameters", config.num_params(), angles.len())?;
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("quantum parameters"));
        }
        Ok(Self {
            depth: config.depth,
            num_qubits: config.num_qubits,
            angles,
        })
    }

    /// Angles drawn uniformly from `(-half_width, half_width)`.
    pub fn random<R: Rng + ?Sized>(config: &CircuitConfig, half_width: f64, rng: &mut R) -> Self {
        let angles = (0..config.num_params())
            .map(|_| rng.random_range(-half_width..half_width))
            .collect();
        Self {
            depth: config.depth,
            num_qubits: config.num_qubits,
            angles,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn layer(&self, layer: usize) -> &[f64] {
        &self.angles[layer * self.num_qubits..(layer + 1) * self.num_qubits]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.angles
    }

    pub(crate) fn check(&self, config: &CircuitConfig) -> Result<()> {
        Error::check_len("circuit depth", config.depth, self.depth)?;
        Error::check_len("circuit width", config.num_qubits, self.num_qubits)
    }
}

/// Dense row-major Jacobian, `rows` outputs by `cols` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Jacobian {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Vector-Jacobian product `upstreamᵀ · J`.
    pub fn vjp(&self, upstream: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("jacobian upstream", self.rows, upstream.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, u) in upstream.iter().enumerate() {
            for (o, j) in out.iter_mut().zip(self.row(r)) {
                *o += u * j;
            }
        }
        Ok(out)
    }
}

fn check_input(z: &[f64], config: &CircuitConfig) -> Result<()> {
    Error::check_len("circuit input", config.num_qubits, z.len())?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("circuit input"));
    }
    Ok(())
}

/// Fresh |0…0⟩, Hadamard on every qubit, then `rotation(embed_axis, z_q)` on qubit `q`.
pub fn embed(z: &[f64], config: &CircuitConfig) -> Result<StateVector> {
    config.validate()?;
    check_input(z, config)?;
    let mut state = StateVector::zero(config.num_qubits)?;
    for q in 0..config.num_qubits {
        state.hadamard(q)?;
    }
    for (q, &angle) in z.iter().enumerate() {
        state.rotate(q, config.embed_axis, angle)?;
    }
    Ok(state)
}

/// CNOT chain `q → q+1` for `q = 0..η-1`, then `rotation(entangle_axis, angles[q])`.
pub fn entangle_layer(
    state: &mut StateVector,
    angles: &[f64],
    config: &CircuitConfig,
) -> Result<()> {
    Error::check_len("register width", config.num_qubits, state.num_qubits())?;
    Error::check_len("layer angles", config.num_qubits, angles.len())?;
    for q in 0..config.num_qubits.saturating_sub(1) {
        state.cnot(q, q + 1)?;
    }
    for (q, &angle) in angles.iter().enumerate() {
        state.rotate(q, config.entangle_axis, angle)?;
    }
    Ok(())
}

fn run_layers(
    state: &mut StateVector,
    params: &QuantumParams,
    from_layer: usize,
    config: &CircuitConfig,
) -> Result<()> {
    for layer in from_layer..config.depth {
        entangle_layer(state, params.layer(layer), config)?;
    }
    Ok(())
}

fn readout(state: &StateVector, config: &CircuitConfig) -> Result<Vec<f64>> {
    state.expect_z_prefix(config.num_outputs)
}

/// ⟨Z⟩ of qubits `0..σ` after the full circuit.
pub fn forward(z: &[f64], params: &QuantumParams, config: &CircuitConfig) -> Result<Vec<f64>> {
    params.check(config)?;
    let mut state = embed(z, config)?;
    run_layers(&mut state, params, 0, config)?;
    readout(&state, config)
}

/// ∂output_k/∂φ_{l,q} as a σ × (δ·η) Jacobian, columns ordered `l·η + q`.
///
/// Costs 2·δ·η circuit evaluations, each starting from the cached state just before the
/// shifted layer.
pub fn param_shift_grad(
    z: &[f64],
    params: &QuantumParams,
    config: &CircuitConfig,
) -> Result<Jacobian> {
    params.check(config)?;
    let width = config.num_qubits;
    let mut jac = Jacobian::zeros(config.num_outputs, config.num_params());

    // prefix[l] is the state entering layer l.
    let mut prefix = Vec::with_capacity(config.depth);
    let mut state = embed(z, config)?;
    for layer in 0..config.depth {
        prefix.push(state.clone());
        entangle_layer(&mut state, params.layer(layer), config)?;
    }

    let mut shifted = params.clone();
    for (layer, entering) in prefix.iter().enumerate() {
        for q in 0..width {
            let col = layer * width + q;
            let original = params.as_slice()[col];
            let mut eval = |angle: f64| -> Result<Vec<f64>> {
                shifted.as_mut_slice()[col] = angle;
                let mut s = entering.clone();
                entangle_layer(&mut s, shifted.layer(layer), config)?;
                run_layers(&mut s, &shifted, layer + 1, config)?;
                readout(&s, config)
            };
            let plus = eval(original + FRAC_PI_2)?;
            let minus = eval(original - FRAC_PI_2)?;
            shifted.as_mut_slice()[col] = original;
            for k in 0..config.num_outputs {
                jac.data[k * jac.cols + col] = (plus[k] - minus[k]) / 2.0;
            }
        }
    }
    Ok(jac)
}

/// ∂output_k/∂z_q as a σ × η Jacobian, by shifting the embedding angles.
pub fn input_jacobian(
    z: &[f64],
    params: &QuantumParams,
    config: &CircuitConfig,
) -> Result<Jacobian> {
    params.check(config)?;
    check_input(z, config)?;
    let mut jac = Jacobian::zeros(config.num_outputs, config.num_qubits);
    let mut shifted = z.to_vec();
    for q in 0..config.num_qubits {
        shifted[q] = z[q] + FRAC_PI_2;
        let plus = forward(&shifted, params, config)?;
        shifted[q] = z[q] - FRAC_PI_2;
        let minus = forward(&shifted, params, config)?;
        shifted[q] = z[q];
        for k in 0..config.num_outputs {
            jac.data[k * jac.cols + q] = (plus[k] - minus[k]) / 2.0;
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use core::f64::consts::PI;
    use num_complex::Complex64;

    fn y_config(n: usize, depth: usize, outputs: usize) -> CircuitConfig {
        CircuitConfig::new(n, depth, outputs).unwrap()
    }

    fn random_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-scale..scale)).collect()
    }

    /// Central differences of `f` at `x`, one column per coordinate.
    fn finite_diff(
        x: &[f64],
        outputs: usize,
        step: f64,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Jacobian {
        let mut jac = Jacobian::zeros(outputs, x.len());
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            probe[i] = x[i] + step;
            let plus = f(&probe);
            probe[i] = x[i] - step;
            let minus = f(&probe);
            probe[i] = x[i];
            for k in 0..outputs {
                jac.data[k * x.len() + i] = (plus[k] - minus[k]) / (2.0 * step);
            }
        }
        jac
    }

    #[test]
    fn config_rejects_too_many_outputs() {
        assert!(CircuitConfig::new(2, 1, 3).is_err());
        assert!(CircuitConfig::new(0, 1, 0).is_err());
        assert!(CircuitConfig::new(3, 0, 3).is_ok());
    }

    #[test]
    fn embed_zero_input_is_uniform_superposition() {
        let config = y_config(3, 0, 3);
        let state = embed(&[0.0; 3], &config).unwrap();
        let amp = 1.0 / (8.0f64).sqrt();
        for a in state.amplitudes() {
            assert!((a - Complex64::new(amp, 0.0)).norm() < 1e-15);
        }
        for q in 0..3 {
            assert!(state.expect_z(q).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn embed_single_qubit_cases() {
        let config = y_config(1, 0, 1);
        let state = embed(&[-FRAC_PI_2], &config).unwrap();
        assert!((state.expect_z(0).unwrap() - 1.0).abs() < 1e-15);

        let config = CircuitConfig::with_axes(1, 0, 1, Axis::Z, Axis::Z).unwrap();
        for theta in [0.0, 0.5, 1.0, 2.0] {
            let state = embed(&[theta], &config).unwrap();
            assert!(state.expect_z(0).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn embed_dimension_mismatch() {
        let config = y_config(3, 0, 1);
        assert_eq!(
            embed(&[0.0; 2], &config).unwrap_err(),
            Error::shape("circuit input", 3, 2)
        );
    }

    #[test]
    fn entangle_layer_cases() {
        let config = y_config(2, 1, 2);
        let mut s = StateVector::zero(2).unwrap();
        entangle_layer(&mut s, &[0.0, 0.0], &config).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());

        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(alloc::vec![zero, one, zero, zero]).unwrap();
        entangle_layer(&mut s, &[0.0, 0.0], &config).unwrap();
        assert_eq!(s.amplitudes(), &[zero, zero, zero, one]);

        let config = y_config(3, 1, 1);
        let mut rng = stream(3, Stream::Test);
        let mut s = embed(&random_vec(&mut rng, 3, 1.0), &config).unwrap();
        entangle_layer(&mut s, &random_vec(&mut rng, 3, PI), &config).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);

        assert!(entangle_layer(&mut s, &[0.0; 2], &config).is_err());
    }

    #[test]
    fn forward_plus_state_reads_zero() {
        let config = y_config(1, 0, 1);
        let out = forward(&[0.0], &QuantumParams::zeros(&config), &config).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].abs() < 1e-15);
    }

    /// Independent 4×4 chain: H⊗H, then CNOT(0→1), then RY(π) on qubit 0, RY(0) on qubit 1.
    #[test]
    fn forward_two_qubit_dense_oracle() {
        let h = 1.0 / 2f64.sqrt();
        // basis index = q0 + 2·q1
        // H on both qubits from |00⟩: uniform 1/2
        let mut v = [h * h, h * h, h * h, h * h];
        // CNOT(0→1) swaps indices 1 and 3
        v.swap(1, 3);
        // RY(π) on qubit 0 = [[0,-1],[1,0]] on pairs (0,1) and (2,3)
        let ry = |a: f64, b: f64| (-b, a);
        let (a0, a1) = ry(v[0], v[1]);
        let (a2, a3) = ry(v[2], v[3]);
        v = [a0, a1, a2, a3];
        let z0 = v[0] * v[0] - v[1] * v[1] + v[2] * v[2] - v[3] * v[3];

        let config = y_config(2, 1, 1);
        let params = QuantumParams::from_flat(&config, alloc::vec![PI, 0.0]).unwrap();
        let out = forward(&[0.0, 0.0], &params, &config).unwrap();
        assert!((out[0] - z0).abs() < 1e-12, "{} vs {z0}", out[0]);
    }

    #[test]
    fn all_z_outputs_vanish() {
        let mut rng = stream(11, Stream::Test);
        for n in 1..=4 {
            for depth in 0..=3 {
                let config = CircuitConfig::with_axes(n, depth, n, Axis::Z, Axis::Z).unwrap();
                for _ in 0..10 {
                    let z = random_vec(&mut rng, n, 3.0);
                    let params = QuantumParams::random(&config, PI, &mut rng);
                    for v in forward(&z, &params, &config).unwrap() {
                        assert!(v.abs() < 1e-12);
                    }
                    let grad = param_shift_grad(&z, &params, &config).unwrap();
                    assert!(grad.data.iter().all(|g| g.abs() < 1e-12));
                    let jac = input_jacobian(&z, &params, &config).unwrap();
                    assert!(jac.data.iter().all(|g| g.abs() < 1e-12));
                }
            }
        }
    }

    #[test]
    fn shift_rule_on_cosine_probe() {
        // RY(θ)|0⟩ without the Hadamard gives ⟨Z⟩ = cos θ.
        let f = |theta: f64| {
            let mut s = StateVector::zero(1).unwrap();
            s.rotate(0, Axis::Y, theta).unwrap();
            s.expect_z(0).unwrap()
        };
        for theta in [0.0, 0.4, 1.3, -2.0] {
            let shift = (f(theta + FRAC_PI_2) - f(theta - FRAC_PI_2)) / 2.0;
            assert!((shift + theta.sin()).abs() < 1e-14);
        }
        assert!(((f(FRAC_PI_2) - f(-FRAC_PI_2)) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn shift_gradients_match_finite_differences() {
        let mut rng = stream(5, Stream::Test);
        let step = 1e-4;
        for instance in 0..200 {
            let n = 1 + instance % 4;
            let depth = instance % 4;
            let outputs = 1 + (instance / 4) % n;
            let axes = [Axis::X, Axis::Y, Axis::Z];
            let config = CircuitConfig::with_axes(
                n,
                depth,
                outputs,
                axes[instance % 3],
                axes[(instance / 3) % 3],
            )
            .unwrap();
            let z = random_vec(&mut rng, n, 2.0);
            let params = QuantumParams::random(&config, PI, &mut rng);

            let grad = param_shift_grad(&z, &params, &config).unwrap();
            let fd = finite_diff(params.as_slice(), outputs, step, |p| {
                let p = QuantumParams::from_flat(&config, p.to_vec()).unwrap();
                forward(&z, &p, &config).unwrap()
            });
            for (a, b) in grad.data.iter().zip(&fd.data) {
                assert!((a - b).abs() < 1e-5, "instance {instance}: {a} vs {b}");
            }

            let jac = input_jacobian(&z, &params, &config).unwrap();
            let fd = finite_diff(&z, outputs, step, |zz| {
                forward(zz, &params, &config).unwrap()
            });
            for (a, b) in jac.data.iter().zip(&fd.data) {
                assert!((a - b).abs() < 1e-5, "instance {instance}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn single_qubit_input_jacobian_is_negative_cosine() {
        // H then RY(z) on |0⟩ gives ⟨Z⟩ = −sin z.
        let config = y_config(1, 0, 1);
        let params = QuantumParams::zeros(&config);
        let jac = input_jacobian(&[0.0], &params, &config).unwrap();
        assert!((jac.get(0, 0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn vjp_contracts_rows() {
        let jac = Jacobian {
            rows: 2,
            cols: 3,
            data: alloc::vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        };
        assert_eq!(
            jac.vjp(&[1.0, -1.0]).unwrap(),
            alloc::vec![-3.0, -3.0, -3.0]
        );
        assert!(jac.vjp(&[1.0]).is_err());
    }
}
