use super::{forbidden_pairs, is_feasible, FlightGateInstance};
use crate::encoding::Encoding;
use crate::error::{Error, Result};

/// Exhaustive basis-state counting stops here.
pub const MAX_RATIO_QUBITS: usize = 28;

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_RATIO_QUBITS {
        return Err(Error::EnumerationCap {
            requested: 1u128 << n.min(127),
            cap: 1u128 << MAX_RATIO_QUBITS,
        });
    }
    Ok(())
}

/// Fraction of all `2^n` basis states that decode to a feasible assignment
/// under `encoding`, by exhaustive count.
pub fn feasible_ratio(inst: &FlightGateInstance, encoding: &dyn Encoding) -> Result<f64> {
    let n = encoding.num_qubits(inst.num_flights, inst.num_gates);
    check_qubits(n)?;
    let pairs = forbidden_pairs(inst);
    let feasible = (0..1u64 << n)
        .filter(|&z| {
            encoding
                .decode(inst, z)
                .is_some_and(|a| is_feasible(&pairs, &a))
        })
        .count();
    Ok(feasible as f64 / (1u64 << n) as f64)
}

/// Closed form for the one-hot fraction of states with exactly one gate per
/// flight: `(|G| / 2^|G|)^|F|`.
pub fn one_hot_constraint_ratio(num_flights: usize, num_gates: usize) -> f64 {
    (num_gates as f64 / 2f64.powi(num_gates as i32)).powi(num_flights as i32)
}

/// Exhaustive count of one-hot basis states with exactly one set bit in
/// every flight's block of `num_gates` qubits.
pub fn one_hot_constraint_count(num_flights: usize, num_gates: usize) -> Result<u64> {
    let n = num_flights * num_gates;
    check_qubits(n)?;
    let block = (1u64 << num_gates) - 1;
    Ok((0..1u64 << n)
        .filter(|&z| (0..num_flights).all(|i| ((z >> (i * num_gates)) & block).count_ones() == 1))
        .count() as u64)
}
