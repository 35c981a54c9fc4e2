//! Flight-gate assignment problem data.
//!
//! A [`FlightGateInstance`] holds passenger counts, walking times and flight
//! time windows, all as integers (minutes, passengers). Everything derived
//! from it here is a pure function of the instance.

mod exact;
mod generate;
mod ratio;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exact::{
    difficulty_filter, difficulty_proxy, has_feasible_assignment, rank_by_difficulty,
    solve_exact, DifficultyProxy, ExactSolution, MAX_ASSIGNMENTS,
};
pub use generate::{generate_instance, GenerationConfig, MAX_GENERATION_ATTEMPTS};
pub use ratio::{
    feasible_ratio, one_hot_constraint_count, one_hot_constraint_ratio, MAX_RATIO_QUBITS,
};

/// One flight-gate assignment problem. Field names follow the JSON
/// interchange schema; matrices are row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlightGateInstance {
    pub num_flights: usize,
    pub num_gates: usize,
    /// Arriving passengers per flight.
    pub n_arr: Vec<u64>,
    /// Departing passengers per flight.
    pub n_dep: Vec<u64>,
    /// Transfer passengers from flight i to flight j.
    pub n_trans: Vec<Vec<u64>>,
    /// Walk time from each gate to baggage claim.
    pub t_arr: Vec<u64>,
    /// Walk time from security to each gate.
    pub t_dep: Vec<u64>,
    /// Gate-to-gate walk time, symmetric with zero diagonal.
    pub t_gate: Vec<Vec<u64>>,
    pub t_in: Vec<u64>,
    pub t_out: Vec<u64>,
    pub t_buf: u64,
}

impl FlightGateInstance {
    pub fn validate(&self) -> Result<()> {
        let f = self.num_flights;
        let g = self.num_gates;
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if f == 0 || g == 0 {
            return bad("need at least one flight and one gate".into());
        }
        for (name, len, want) in [
            ("n_arr", self.n_arr.len(), f),
            ("n_dep", self.n_dep.len(), f),
            ("n_trans", self.n_trans.len(), f),
            ("t_in", self.t_in.len(), f),
            ("t_out", self.t_out.len(), f),
            ("t_arr", self.t_arr.len(), g),
            ("t_dep", self.t_dep.len(), g),
            ("t_gate", self.t_gate.len(), g),
        ] {
            if len != want {
                return bad(format!("{name} has length {len}, expected {want}"));
            }
        }
        for (i, row) in self.n_trans.iter().enumerate() {
            if row.len() != f {
                return bad(format!("n_trans row {i} has length {}, expected {f}", row.len()));
            }
            if row[i] != 0 {
                return bad(format!("n_trans[{i}][{i}] must be zero"));
            }
        }
        for (a, row) in self.t_gate.iter().enumerate() {
            if row.len() != g {
                return bad(format!("t_gate row {a} has length {}, expected {g}", row.len()));
            }
            if row[a] != 0 {
                return bad(format!("t_gate[{a}][{a}] must be zero"));
            }
            for (b, &t) in row.iter().enumerate() {
                if t != self.t_gate[b][a] {
                    return bad(format!("t_gate is not symmetric at ({a}, {b})"));
                }
            }
        }
        for i in 0..f {
            if self.t_in[i] >= self.t_out[i] {
                return bad(format!(
                    "flight {i}: t_in {} must precede t_out {}",
                    self.t_in[i], self.t_out[i]
                ));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Total number of gate assignments, `|G|^|F|`, saturating.
    pub fn assignment_count(&self) -> u128 {
        (self.num_gates as u128)
            .checked_pow(self.num_flights as u32)
            .unwrap_or(u128::MAX)
    }
}

/// Gate index for every flight. Exactly one gate per flight holds by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    pub gate_of: Vec<usize>,
}

impl Assignment {
    pub fn new(gate_of: Vec<usize>) -> Self {
        Self { gate_of }
    }

    pub fn num_flights(&self) -> usize {
        self.gate_of.len()
    }

    pub fn check(&self, inst: &FlightGateInstance) -> Result<()> {
        if self.gate_of.len() != inst.num_flights {
            return Err(Error::LengthMismatch {
                what: "assignment",
                expected: inst.num_flights,
                actual: self.gate_of.len(),
            });
        }
        match self.gate_of.iter().find(|&&g| g >= inst.num_gates) {
            Some(&gate) => Err(Error::GateOutOfRange {
                gate,
                num_gates: inst.num_gates,
            }),
            None => Ok(()),
        }
    }
}

impl From<Vec<usize>> for Assignment {
    fn from(gate_of: Vec<usize>) -> Self {
        Self { gate_of }
    }
}

/// Ordered flight pairs `(i, j)` with `t_in[i] < t_in[j] < t_out[i] + t_buf`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenPairs {
    pub pairs: BTreeSet<(usize, usize)>,
}

impl ForbiddenPairs {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Number of forbidden pairs sharing a gate under `a`.
    pub fn violations(&self, a: &Assignment) -> usize {
        self.iter()
            .filter(|&(i, j)| a.gate_of[i] == a.gate_of[j])
            .count()
    }
}

impl FromIterator<(usize, usize)> for ForbiddenPairs {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        Self {
            pairs: iter.into_iter().collect(),
        }
    }
}

pub fn forbidden_pairs(inst: &FlightGateInstance) -> ForbiddenPairs {
    let f = inst.num_flights;
    (0..f)
        .flat_map(|i| (0..f).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            inst.t_in[i] < inst.t_in[j] && inst.t_in[j] < inst.t_out[i] + inst.t_buf
        })
        .collect()
}

/// The three components of the total passenger travel time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TravelTime {
    pub arrival: f64,
    pub departure: f64,
    pub transfer: f64,
}

impl TravelTime {
    pub fn total(&self) -> f64 {
        self.arrival + self.departure + self.transfer
    }
}

pub fn travel_time_parts(inst: &FlightGateInstance, a: &Assignment) -> Result<TravelTime> {
    a.check(inst)?;
    Ok(travel_time_parts_unchecked(inst, &a.gate_of))
}

pub fn travel_time(inst: &FlightGateInstance, a: &Assignment) -> Result<f64> {
    travel_time_parts(inst, a).map(|t| t.total())
}

pub(crate) fn travel_time_parts_unchecked(inst: &FlightGateInstance, gate_of: &[usize]) -> TravelTime {
    let mut t = TravelTime::default();
    for (i, &g) in gate_of.iter().enumerate() {
        t.arrival += (inst.n_arr[i] * inst.t_arr[g]) as f64;
        t.departure += (inst.n_dep[i] * inst.t_dep[g]) as f64;
        for (j, &h) in gate_of.iter().enumerate() {
            t.transfer += (inst.n_trans[i][j] * inst.t_gate[g][h]) as f64;
        }
    }
    t
}

/// True iff no forbidden pair shares a gate.
pub fn is_feasible(pairs: &ForbiddenPairs, a: &Assignment) -> bool {
    pairs.iter().all(|(i, j)| a.gate_of[i] != a.gate_of[j])
}
