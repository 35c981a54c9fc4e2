//! Diagonal qubit Hamiltonians for the flight-gate problem.
//!
//! Two interchangeable encodings implement [`Encoding`]: `one_hot` (one qubit
//! per flight/gate pair, QUBO penalties for both constraints) and `binary`
//! (cyclic codewords, only the occupancy constraint penalized). Both produce
//! a [`PauliZPolynomial`]; [`diagonal_energies`] turns it into the dense
//! [`EnergyTable`] the VQE uses as its cost oracle.

mod binary;
mod pauli;
mod qubo;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::{Assignment, FlightGateInstance};
use crate::registry::Registry;

pub use binary::{bits_per_flight, build_binary_hamiltonian, cyclic_gate, decode_bits, BinaryLayout};
pub use pauli::{
    diagonal_energies, diagonal_energies_capped, ground_bitstrings, EnergyTable, FileTerm,
    GroundStates, HamiltonianFile, PauliTerm, PauliZPolynomial, COEFF_DROP_TOLERANCE,
    DEFAULT_MAX_TABLE_QUBITS, GROUND_TOLERANCE,
};
pub use qubo::{build_qubo, qubo_to_ising, QuboProblem};

/// Penalty weights for the one-gate-per-flight and occupancy constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    pub one: f64,
    pub not: f64,
}

/// Upper bound on the travel time of any assignment: every passenger walks
/// the longest walk of their kind.
pub fn travel_time_upper_bound(inst: &FlightGateInstance) -> f64 {
    let max_arr = inst.t_arr.iter().copied().max().unwrap_or(0);
    let max_dep = inst.t_dep.iter().copied().max().unwrap_or(0);
    let max_gate = inst.t_gate.iter().flatten().copied().max().unwrap_or(0);
    let arr: u64 = inst.n_arr.iter().map(|n| n * max_arr).sum();
    let dep: u64 = inst.n_dep.iter().map(|n| n * max_dep).sum();
    let trans: u64 = inst.n_trans.iter().flatten().map(|n| n * max_gate).sum();
    (arr + dep + trans) as f64
}

/// `λ_one = λ_not = 1 + U`, so one violated constraint always costs more than
/// the spread of achievable travel times.
pub fn default_penalties(inst: &FlightGateInstance) -> Penalties {
    let lambda = 1.0 + travel_time_upper_bound(inst);
    Penalties {
        one: lambda,
        not: lambda,
    }
}

pub trait Encoding: Send + Sync {
    fn name(&self) -> &'static str;

    fn num_qubits(&self, num_flights: usize, num_gates: usize) -> usize;

    fn hamiltonian(&self, inst: &FlightGateInstance, penalties: Penalties) -> PauliZPolynomial;

    /// Assignment held by a basis state, or `None` when the state does not
    /// put every flight at exactly one gate.
    fn decode(&self, inst: &FlightGateInstance, basis_state: u64) -> Option<Assignment>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OneHotEncoding;

impl Encoding for OneHotEncoding {
    fn name(&self) -> &'static str {
        "one_hot"
    }

    fn num_qubits(&self, num_flights: usize, num_gates: usize) -> usize {
        num_flights * num_gates
    }

    fn hamiltonian(&self, inst: &FlightGateInstance, penalties: Penalties) -> PauliZPolynomial {
        qubo_to_ising(&build_qubo(inst, penalties))
    }

    fn decode(&self, inst: &FlightGateInstance, basis_state: u64) -> Option<Assignment> {
        let g = inst.num_gates;
        let block = (1u64 << g) - 1;
        (0..inst.num_flights)
            .map(|i| {
                let bits = basis_state >> (i * g) & block;
                (bits.count_ones() == 1).then(|| bits.trailing_zeros() as usize)
            })
            .collect::<Option<Vec<_>>>()
            .map(Assignment::new)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BinaryEncoding;

impl Encoding for BinaryEncoding {
    fn name(&self) -> &'static str {
        "binary"
    }

    fn num_qubits(&self, num_flights: usize, num_gates: usize) -> usize {
        BinaryLayout::new(num_flights, num_gates).num_qubits()
    }

    fn hamiltonian(&self, inst: &FlightGateInstance, penalties: Penalties) -> PauliZPolynomial {
        build_binary_hamiltonian(inst, penalties.not)
    }

    fn decode(&self, inst: &FlightGateInstance, basis_state: u64) -> Option<Assignment> {
        Some(BinaryLayout::new(inst.num_flights, inst.num_gates).decode_state(basis_state))
    }
}

/// Built-in encodings: `one_hot` (alias `onehot`) and `binary`.
pub fn encodings() -> &'static Registry<dyn Encoding> {
    static REGISTRY: OnceLock<Registry<dyn Encoding>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn Encoding> = Registry::new("encoding");
        reg.register("one_hot", Arc::new(OneHotEncoding))
            .register("binary", Arc::new(BinaryEncoding))
            .alias("onehot", "one_hot");
        reg
    })
}

pub fn encoding(name: &str) -> Result<Arc<dyn Encoding>> {
    encodings().get(name)
}
