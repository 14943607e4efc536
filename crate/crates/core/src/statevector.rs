//! Dense statevector simulation.
//!
//! Qubit `q` corresponds to bit `q` of the amplitude index, so qubit 0 is the least
//! significant bit. Rotations follow `R_P(θ) = exp(-iθP/2)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the simulator will allocate (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

/// Pauli axis of a single-qubit rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Axis::X),
            "Y" | "y" => Ok(Axis::Y),
            "Z" | "z" => Ok(Axis::Z),
            other => Err(Error::Config(alloc::format!(
                "unknown rotation axis {other:?} (expected X, Y or Z)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero basis state |0…0⟩.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Config(alloc::format!(
                "register size {num_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes. The length must be a power of two; the
    /// amplitudes are taken as given (no normalization).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Config(alloc::format!(
                "amplitude vector length {len} is not a power of two ≥ 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::Config(alloc::format!(
                "register size {num_qubits} exceeds {MAX_QUBITS}"
            )));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite("state amplitudes"));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|a| a.norm_sqr()).sum())
    }

    fn check_qubit(&self, index: usize) -> Result<()> {
        if index < self.num_qubits {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange {
                index,
                num_qubits: self.num_qubits,
            })
        }
    }

    /// Applies a 2×2 matrix `[[m00, m01], [m10, m11]]` to one qubit.
    fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) {
        let stride = 1usize << qubit;
        let len = self.amplitudes.len();
        let mut block = 0;
        while block < len {
            for i in block..block + stride {
                let j = i | stride;
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[j];
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
            }
            block += stride << 1;
        }
    }

    pub fn hadamard(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(qubit, [[h, h], [h, -h]]);
        Ok(())
    }

    /// Applies `exp(-i·angle/2·P)` for the Pauli `P` named by `axis`.
    pub fn rotate(&mut self, qubit: usize, axis: Axis, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        if !angle.is_finite() {
            return Err(Error::NonFinite("rotation angle"));
        }
        let (s, c) = libm::sincos(angle / 2.0);
        match axis {
            Axis::X => {
                let cc = Complex64::new(c, 0.0);
                let ms = Complex64::new(0.0, -s);
                self.apply_single(qubit, [[cc, ms], [ms, cc]]);
            }
            Axis::Y => {
                let cc = Complex64::new(c, 0.0);
                self.apply_single(
                    qubit,
                    [[cc, Complex64::new(-s, 0.0)], [Complex64::new(s, 0.0), cc]],
                );
            }
            Axis::Z => {
                // Diagonal: skip the generic 2×2 path.
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                let stride = 1usize << qubit;
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if i & stride == 0 { lo } else { hi };
                }
            }
        }
        Ok(())
    }

    /// Flips the target qubit on every basis state whose control bit is 1.
    pub fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::Config(alloc::format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amplitudes.swap(i, i | tbit);
            }
        }
        Ok(())
    }

    /// ⟨Z⟩ of one qubit: Σ ±|a_i|², positive where bit `qubit` of `i` is 0.
    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let value: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i & bit == 0 {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum();
        Ok(value.clamp(-1.0, 1.0))
    }

    /// ⟨Z⟩ of qubits `0..count` in a single pass over the amplitudes.
    pub fn expect_z_prefix(&self, count: usize) -> Result<Vec<f64>> {
        if count > self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: count.saturating_sub(1),
                num_qubits: self.num_qubits,
            });
        }
        let mut out = vec![0.0; count];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, slot) in out.iter_mut().enumerate() {
                if i >> q & 1 == 0 {
                    *slot += p;
                } else {
                    *slot -= p;
                }
            }
        }
        for v in &mut out {
            *v = v.clamp(-1.0, 1.0);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_close(state: &StateVector, expected: &[Complex64], tol: f64) {
        assert_eq!(state.amplitudes().len(), expected.len());
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() <= tol, "{a} vs {e}");
        }
    }

    #[test]
    fn zero_state() {
        assert_eq!(
            StateVector::zero(1).unwrap().amplitudes(),
            &[c(1.0), c(0.0)]
        );
        assert_eq!(
            StateVector::zero(2).unwrap().amplitudes(),
            &[c(1.0), c(0.0), c(0.0), c(0.0)]
        );
        let s = StateVector::zero(6).unwrap();
        assert_eq!(s.amplitudes().len(), 64);
        assert_eq!(s.amplitudes()[0], c(1.0));
        assert_eq!(s.norm(), 1.0);
    }

    #[test]
    fn register_size_guard() {
        assert!(matches!(StateVector::zero(0), Err(Error::Config(_))));
        assert!(matches!(StateVector::zero(25), Err(Error::Config(_))));
    }

    #[test]
    fn hadamard_cases() {
        let mut s = StateVector::zero(1).unwrap();
        s.hadamard(0).unwrap();
        assert_close(&s, &[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)], 1e-15);

        let mut s = StateVector::zero(2).unwrap();
        s.hadamard(1).unwrap();
        // (|00⟩ + |10⟩)/√2 where qubit 1 is the high bit: indices 0 and 2.
        assert_close(
            &s,
            &[c(FRAC_1_SQRT_2), c(0.0), c(FRAC_1_SQRT_2), c(0.0)],
            1e-15,
        );

        assert_eq!(
            s.hadamard(2),
            Err(Error::QubitOutOfRange {
                index: 2,
                num_qubits: 2
            })
        );
    }

    #[test]
    fn rotation_cases() {
        let mut s = StateVector::zero(1).unwrap();
        s.rotate(0, Axis::Y, PI).unwrap();
        assert_close(&s, &[c(0.0), c(1.0)], 1e-15);

        for theta in [0.0, 0.3, 1.0, -2.5, 7.0] {
            let mut s = StateVector::zero(1).unwrap();
            s.rotate(0, Axis::Z, theta).unwrap();
            assert!((s.expect_z(0).unwrap() - 1.0).abs() < 1e-15);
        }

        // H then RY(-π/2): [[c, s],[-s, c]]·[1,1]/√2 with c = s = 1/√2 gives [1, 0].
        let mut s = StateVector::zero(1).unwrap();
        s.hadamard(0).unwrap();
        s.rotate(0, Axis::Y, -FRAC_PI_2).unwrap();
        assert!((s.expect_z(0).unwrap() - 1.0).abs() < 1e-15);

        let mut s = StateVector::zero(1).unwrap();
        assert_eq!(
            s.rotate(0, Axis::X, f64::NAN),
            Err(Error::NonFinite("rotation angle"))
        );
        assert!(s.rotate(1, Axis::X, 0.1).is_err());
    }

    #[test]
    fn rx_matches_definition() {
        // RX(θ)|0⟩ = cos(θ/2)|0⟩ − i sin(θ/2)|1⟩
        let theta = 0.7_f64;
        let mut s = StateVector::zero(1).unwrap();
        s.rotate(0, Axis::X, theta).unwrap();
        let expected = [
            c((theta / 2.0).cos()),
            Complex64::new(0.0, -(theta / 2.0).sin()),
        ];
        assert_close(&s, &expected, 1e-15);
    }

    #[test]
    fn cnot_cases() {
        // |01⟩ in qubit0=1 notation is index 1.
        let mut s = StateVector::from_amplitudes(vec![c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        s.cnot(0, 1).unwrap();
        assert_close(&s, &[c(0.0), c(0.0), c(0.0), c(1.0)], 0.0);

        let mut s = StateVector::zero(2).unwrap();
        s.cnot(0, 1).unwrap();
        assert_close(&s, &[c(1.0), c(0.0), c(0.0), c(0.0)], 0.0);

        assert!(matches!(s.cnot(1, 1), Err(Error::Config(_))));
        assert!(s.cnot(0, 2).is_err());
    }

    #[test]
    fn expectation_cases() {
        let s = StateVector::zero(1).unwrap();
        assert_eq!(s.expect_z(0).unwrap(), 1.0);
        let one = StateVector::from_amplitudes(vec![c(0.0), c(1.0)]).unwrap();
        assert_eq!(one.expect_z(0).unwrap(), -1.0);
        let mut plus = StateVector::zero(1).unwrap();
        plus.hadamard(0).unwrap();
        assert!(plus.expect_z(0).unwrap().abs() < 1e-12);
        assert!(plus.expect_z(1).is_err());
    }

    #[derive(Debug, Clone)]
    enum Op {
        H(usize),
        R(usize, Axis, f64),
        Cx(usize, usize),
    }

    fn op_strategy(n: usize) -> impl Strategy<Value = Op> {
        let axis = prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)];
        prop_oneof![
            (0..n).prop_map(Op::H),
            (0..n, axis, -7.0..7.0f64).prop_map(|(q, a, t)| Op::R(q, a, t)),
            (0..n, 1..n).prop_map(move |(c, d)| Op::Cx(c, (c + d) % n)),
        ]
    }

    fn apply(s: &mut StateVector, op: &Op) {
        match *op {
            Op::H(q) => s.hadamard(q).unwrap(),
            Op::R(q, a, t) => s.rotate(q, a, t).unwrap(),
            Op::Cx(c, t) => s.cnot(c, t).unwrap(),
        }
    }

    fn inverse(op: &Op) -> Op {
        match *op {
            Op::R(q, a, t) => Op::R(q, a, -t),
            ref other => other.clone(),
        }
    }

    proptest! {
        #[test]
        fn norm_preserved(ops in proptest::collection::vec(op_strategy(6), 0..100)) {
            let mut s = StateVector::zero(6).unwrap();
            for op in &ops {
                apply(&mut s, op);
            }
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
            for q in 0..6 {
                let z = s.expect_z(q).unwrap();
                prop_assert!((-1.0..=1.0).contains(&z));
            }
        }

        #[test]
        fn gate_then_inverse_is_identity(
            prefix in proptest::collection::vec(op_strategy(4), 0..20),
            op in op_strategy(4),
        ) {
            let mut s = StateVector::zero(4).unwrap();
            for p in &prefix {
                apply(&mut s, p);
            }
            let before = s.clone();
            apply(&mut s, &op);
            apply(&mut s, &inverse(&op));
            for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn prefix_readout_matches_single(ops in proptest::collection::vec(op_strategy(5), 0..30)) {
            let mut s = StateVector::zero(5).unwrap();
            for op in &ops {
                apply(&mut s, op);
            }
            let all = s.expect_z_prefix(5).unwrap();
            for (q, &z) in all.iter().enumerate() {
                prop_assert!((z - s.expect_z(q).unwrap()).abs() < 1e-14);
            }
        }
    }
}
