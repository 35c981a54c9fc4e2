//! Dense statevector simulation.
//!
//! Basis index convention: qubit `p` is bit `p` of the index, so qubit 0 is
//! the least significant bit. The encoders use the same convention.

mod ansatz;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub use ansatz::{
    ansatz, ansatz_families, Ansatz, AnsatzSpec, EntanglingAnsatz, ParameterVector, ProductAnsatz,
};

pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Amplitude dumps are limited to this many qubits.
pub const MAX_DUMP_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize, max_qubits: usize) -> Result<Self> {
        if num_qubits > max_qubits {
            return Err(Error::QubitCap {
                qubits: num_qubits,
                cap: max_qubits,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes is not a power of two",
                amplitudes.len()
            )));
        }
        Ok(Self {
            num_qubits: amplitudes.len().trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// `R_Y(θ) = exp(-iθY/2)` on `qubit`.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let stride = 1 << qubit;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = x * c - y * s;
                *a1 = x * s + y * c;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amplitudes.swap(i, i | tbit);
            }
        }
    }

    /// `T = diag(1, e^{iπ/4})` on `qubit`.
    pub fn apply_t(&mut self, qubit: usize) {
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let stride = 1 << qubit;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            for a in &mut block[stride..] {
                *a *= phase;
            }
        }
    }

    /// Born-rule probabilities `|ψ_z|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// `shots` i.i.d. basis-state draws, reproducible per `seed`.
    pub fn sample(&self, shots: usize, seed: u64) -> Vec<u64> {
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        // u * acc can round up to acc itself
        let last = self
            .amplitudes
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..shots)
            .map(|_| {
                let u = rng.gen::<f64>() * acc;
                cumulative.partition_point(|&c| c <= u).min(last) as u64
            })
            .collect()
    }

    /// Probability mass on `ground_set`.
    pub fn fidelity(&self, ground_set: &[u64]) -> Result<f64> {
        if ground_set.is_empty() {
            return Err(Error::Empty("ground set"));
        }
        Ok(ground_set
            .iter()
            .map(|&z| self.amplitudes[z as usize].norm_sqr())
            .sum())
    }

    /// JSON-friendly amplitude dump, `[re, im]` per basis state.
    pub fn dump(&self) -> Result<AmplitudeDump> {
        if self.num_qubits > MAX_DUMP_QUBITS {
            return Err(Error::QubitCap {
                qubits: self.num_qubits,
                cap: MAX_DUMP_QUBITS,
            });
        }
        Ok(AmplitudeDump {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeDump {
    pub num_qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

pub fn probabilities(state: &StateVector) -> Vec<f64> {
    state.probabilities()
}

pub fn sample_bitstrings(state: &StateVector, shots: usize, seed: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("need at least one shot".into()));
    }
    Ok(state.sample(shots, seed))
}

pub fn fidelity(state: &StateVector, ground_set: &[u64]) -> Result<f64> {
    state.fidelity(ground_set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn basis(n: usize, z: usize) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[z] = Complex64::new(1.0, 0.0);
        StateVector::from_amplitudes(amps).unwrap()
    }

    fn uniform(n: usize) -> StateVector {
        let a = (1.0 / (1 << n) as f64).sqrt();
        StateVector::from_amplitudes(vec![Complex64::new(a, 0.0); 1 << n]).unwrap()
    }

    #[test]
    fn ry_pi_flips() {
        let mut s = StateVector::zero(1, 24).unwrap();
        s.apply_ry(0, PI);
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-15);
        assert!(s.amplitudes()[0].norm() < 1e-15);
    }

    #[test]
    fn cnot_control_is_low_qubit() {
        let mut s = basis(2, 0b01);
        s.apply_cnot(0, 1);
        assert_eq!(s, basis(2, 0b11));
        let mut s = basis(2, 0b10);
        s.apply_cnot(0, 1);
        assert_eq!(s, basis(2, 0b10));
    }

    #[test]
    fn t_gate_phase() {
        let mut s = uniform(1);
        s.apply_t(0);
        let a1 = s.amplitudes()[1];
        assert!((a1.re - 0.5).abs() < 1e-15 && (a1.im - 0.5).abs() < 1e-15);
        assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn probabilities_examples() {
        assert_eq!(basis(2, 2).probabilities(), vec![0.0, 0.0, 1.0, 0.0]);
        for p in uniform(2).probabilities() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling_examples() {
        assert_eq!(sample_bitstrings(&basis(3, 5), 50, 1).unwrap(), vec![5; 50]);
        let s = uniform(1);
        let shots = s.sample(100_000, 7);
        let freq = shots.iter().filter(|&&z| z == 1).count() as f64 / 1e5;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
        assert_eq!(shots, s.sample(100_000, 7));
        assert!(sample_bitstrings(&s, 0, 0).is_err());
    }

    #[test]
    fn sampling_skips_zero_probability_states() {
        // mass only on states 0 and 1 of 4
        let a = FRAC_1_SQRT_2;
        let s = StateVector::from_amplitudes(vec![
            Complex64::new(a, 0.0),
            Complex64::new(a, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!(s.sample(10_000, 3).iter().all(|&z| z < 2));
    }

    #[test]
    fn fidelity_examples() {
        assert_eq!(fidelity(&basis(2, 3), &[1, 3]).unwrap(), 1.0);
        assert_eq!(fidelity(&basis(2, 3), &[0, 1]).unwrap(), 0.0);
        assert!((fidelity(&uniform(3), &[0, 4, 7]).unwrap() - 3.0 / 8.0).abs() < 1e-15);
        assert!(fidelity(&uniform(3), &[]).is_err());
    }

    #[test]
    fn caps() {
        assert!(StateVector::zero(25, DEFAULT_MAX_QUBITS).is_err());
        assert!(uniform(13).dump().is_err());
        assert_eq!(uniform(2).dump().unwrap().amplitudes.len(), 4);
    }
}
