//! Binary encoding with cyclic gate mapping.
//!
//! Each flight owns `M = ⌈log2 |G|⌉` qubits holding a codeword `α'`; the gate
//! is `α' mod |G|`. Flight `i`'s bit `k` lives on qubit `i·M + k`, with
//! `k = 0` the most significant bit of `α'`. Every basis state therefore
//! assigns exactly one gate per flight, and surplus codewords alias onto the
//! low gates.

use serde::{Deserialize, Serialize};

use super::pauli::{PauliZPolynomial, PolynomialAccumulator};
use crate::error::{Error, Result};
use crate::instance::{forbidden_pairs, Assignment, FlightGateInstance};

/// Qubits per flight. At least one, so a single-gate problem still has a
/// register to measure.
pub fn bits_per_flight(num_gates: usize) -> usize {
    (usize::BITS - num_gates.saturating_sub(1).leading_zeros()).max(1) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryLayout {
    pub num_flights: usize,
    pub num_gates: usize,
    pub bits_per_flight: usize,
}

impl BinaryLayout {
    pub fn new(num_flights: usize, num_gates: usize) -> Self {
        Self {
            num_flights,
            num_gates,
            bits_per_flight: bits_per_flight(num_gates),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_flights * self.bits_per_flight
    }

    pub fn codewords(&self) -> usize {
        1 << self.bits_per_flight
    }

    /// Qubit holding bit `k` (0 = most significant) of flight `flight`.
    pub fn qubit(&self, flight: usize, k: usize) -> usize {
        flight * self.bits_per_flight + k
    }

    /// Codeword of `flight` in basis state `z`.
    pub fn codeword(&self, z: u64, flight: usize) -> usize {
        let m = self.bits_per_flight;
        (0..m).fold(0, |acc, k| acc << 1 | (z >> self.qubit(flight, k) & 1) as usize)
    }

    /// Basis state whose registers hold `codewords`.
    pub fn encode(&self, codewords: &[usize]) -> u64 {
        let m = self.bits_per_flight;
        codewords.iter().enumerate().fold(0u64, |z, (i, &c)| {
            (0..m).fold(z, |z, k| z | ((c >> (m - 1 - k) & 1) as u64) << self.qubit(i, k))
        })
    }

    pub fn decode_state(&self, z: u64) -> Assignment {
        Assignment::new(
            (0..self.num_flights)
                .map(|i| self.codeword(z, i) % self.num_gates)
                .collect(),
        )
    }
}

/// `alpha_prime mod num_gates`, for codewords of `M = ⌈log2 |G|⌉` bits.
pub fn cyclic_gate(alpha_prime: usize, num_gates: usize) -> Result<usize> {
    let limit = 1usize << bits_per_flight(num_gates);
    if num_gates == 0 || alpha_prime >= limit {
        return Err(Error::InvalidArgument(format!(
            "codeword {alpha_prime} out of range [0, {limit}) for {num_gates} gates"
        )));
    }
    Ok(alpha_prime % num_gates)
}

/// Decodes a bit vector laid out as `bits[i·M + k]`, most significant first.
pub fn decode_bits(bits: &[bool], num_flights: usize, num_gates: usize) -> Result<Assignment> {
    let layout = BinaryLayout::new(num_flights, num_gates);
    if bits.len() != layout.num_qubits() {
        return Err(Error::LengthMismatch {
            what: "binary-encoded bits",
            expected: layout.num_qubits(),
            actual: bits.len(),
        });
    }
    let z = bits
        .iter()
        .enumerate()
        .fold(0u64, |z, (p, &b)| z | (b as u64) << p);
    Ok(layout.decode_state(z))
}

/// Pauli expansion of the projector `|α'⟩⟨α'|` on one flight's register,
/// using `|z_k⟩⟨z_k| = (I + (-1)^{z_k} Z) / 2` on each qubit. Returns
/// `(coefficient, mask)` for all `2^M` subsets.
fn projector_terms(layout: &BinaryLayout, flight: usize, codeword: usize) -> Vec<(f64, u64)> {
    let m = layout.bits_per_flight;
    let scale = 0.5f64.powi(m as i32);
    (0..1usize << m)
        .map(|subset| {
            let mut coeff = scale;
            let mut mask = 0u64;
            for k in (0..m).filter(|&k| subset >> k & 1 == 1) {
                if codeword >> (m - 1 - k) & 1 == 1 {
                    coeff = -coeff;
                }
                mask |= 1 << layout.qubit(flight, k);
            }
            (coeff, mask)
        })
        .collect()
}

/// `H^arr + H^dep + H^trans + λ_not H^not` as a Pauli-Z polynomial on
/// `|F|·M` qubits.
pub fn build_binary_hamiltonian(inst: &FlightGateInstance, lambda_not: f64) -> PauliZPolynomial {
    let layout = BinaryLayout::new(inst.num_flights, inst.num_gates);
    let f = inst.num_flights;
    let g = inst.num_gates;
    let codewords = layout.codewords();
    let projectors: Vec<Vec<Vec<(f64, u64)>>> = (0..f)
        .map(|i| (0..codewords).map(|c| projector_terms(&layout, i, c)).collect())
        .collect();
    let pairs = forbidden_pairs(inst);
    let mut acc = PolynomialAccumulator::new(layout.num_qubits());

    for i in 0..f {
        for (c, proj) in projectors[i].iter().enumerate() {
            let gate = c % g;
            let w = (inst.n_arr[i] * inst.t_arr[gate] + inst.n_dep[i] * inst.t_dep[gate]) as f64;
            if w != 0.0 {
                for &(coeff, mask) in proj {
                    acc.add(w * coeff, mask);
                }
            }
        }
    }

    for i in 0..f {
        for j in 0..f {
            // n_ii = 0 and (i, i) is never forbidden
            if i == j {
                continue;
            }
            let forbidden = pairs.contains(i, j);
            for (ci, proj_i) in projectors[i].iter().enumerate() {
                for (cj, proj_j) in projectors[j].iter().enumerate() {
                    let (a, b) = (ci % g, cj % g);
                    let mut w = (inst.n_trans[i][j] * inst.t_gate[a][b]) as f64;
                    if forbidden && a == b {
                        w += lambda_not;
                    }
                    if w == 0.0 {
                        continue;
                    }
                    for &(xi, mi) in proj_i {
                        for &(xj, mj) in proj_j {
                            acc.add(w * xi * xj, mi | mj);
                        }
                    }
                }
            }
        }
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::two_by_two;
    use crate::instance::travel_time;

    #[test]
    fn bit_counts() {
        assert_eq!(bits_per_flight(1), 1);
        assert_eq!(bits_per_flight(2), 1);
        assert_eq!(bits_per_flight(3), 2);
        assert_eq!(bits_per_flight(4), 2);
        assert_eq!(bits_per_flight(5), 3);
        assert_eq!(bits_per_flight(8), 3);
        assert_eq!(bits_per_flight(9), 4);
    }

    #[test]
    fn cyclic_examples() {
        assert_eq!(cyclic_gate(3, 3).unwrap(), 0);
        assert_eq!(cyclic_gate(2, 3).unwrap(), 2);
        for a in 0..4 {
            assert_eq!(cyclic_gate(a, 4).unwrap(), a);
        }
        assert!(cyclic_gate(4, 3).is_err());
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_bits(&[false; 4], 2, 3).unwrap().gate_of, vec![0, 0]);
        // flight 0 reads "11" = 3 -> gate 0; flight 1 reads "10" = 2
        assert_eq!(decode_bits(&[true, true, true, false], 2, 3).unwrap().gate_of, vec![0, 2]);
        assert_eq!(decode_bits(&[true, false], 1, 4).unwrap().gate_of, vec![2]);
        assert!(decode_bits(&[true], 1, 4).is_err());
    }

    #[test]
    fn encode_inverts_codeword() {
        let layout = BinaryLayout::new(3, 5);
        for c in 0..8 {
            let z = layout.encode(&[c, 7 - c, c / 2]);
            assert_eq!(layout.codeword(z, 0), c);
            assert_eq!(layout.codeword(z, 1), 7 - c);
            assert_eq!(layout.codeword(z, 2), c / 2);
        }
    }

    #[test]
    fn preimages_are_balanced() {
        for g in 1..=17 {
            let layout = BinaryLayout::new(1, g);
            let mut counts = vec![0usize; g];
            for c in 0..layout.codewords() {
                counts[cyclic_gate(c, g).unwrap()] += 1;
            }
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(hi - lo <= 1, "|G|={g}: {counts:?}");
        }
    }

    #[test]
    fn single_flight_two_gates() {
        let inst = FlightGateInstance {
            num_flights: 1,
            num_gates: 2,
            n_arr: vec![4],
            n_dep: vec![2],
            n_trans: vec![vec![0]],
            t_arr: vec![1, 3],
            t_dep: vec![5, 1],
            t_gate: vec![vec![0, 2], vec![2, 0]],
            t_in: vec![0],
            t_out: vec![9],
            t_buf: 0,
        };
        let h = build_binary_hamiltonian(&inst, 1.0);
        // gate 0: 4 + 10 = 14, gate 1: 12 + 2 = 14 -> constant 14, no Z term
        assert!(h.terms().len() <= 2);
        assert!(h.terms().iter().all(|t| t.weight() == 1));
        assert_eq!(h.energy(0), 14.0);
        assert_eq!(h.energy(1), 14.0);
    }

    #[test]
    fn energy_is_travel_time_plus_penalty() {
        let inst = two_by_two();
        let h = build_binary_hamiltonian(&inst, 100.0);
        let layout = BinaryLayout::new(2, 2);
        for z in 0..4 {
            let a = layout.decode_state(z);
            let violations = if a.gate_of[0] == a.gate_of[1] { 1.0 } else { 0.0 };
            assert_eq!(h.energy(z), travel_time(&inst, &a).unwrap() + 100.0 * violations);
        }
    }
}
