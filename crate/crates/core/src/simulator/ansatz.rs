use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::{StateVector, DEFAULT_MAX_QUBITS};
use crate::error::{Error, Result};
use crate::registry::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub num_qubits: usize,
    /// Number of rotation columns.
    pub layers: usize,
}

impl AnsatzSpec {
    pub fn new(num_qubits: usize, layers: usize) -> Self {
        Self { num_qubits, layers }
    }

    pub fn param_count(&self) -> usize {
        self.num_qubits * self.layers
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.layers == 0 {
            return Err(Error::InvalidArgument(format!(
                "ansatz needs at least one qubit and one layer, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Rotation angles in radians, laid out column by column:
/// `theta[layer * n + qubit]`.
pub type ParameterVector = Vec<f64>;

/// A layered circuit family: `layers` columns of `R_Y` rotations on every
/// qubit, with a family-specific block between consecutive columns.
pub trait Ansatz: Send + Sync {
    fn name(&self) -> &'static str;

    /// Block applied between two rotation columns.
    fn apply_inter_layer(&self, state: &mut StateVector);

    fn param_count(&self, spec: &AnsatzSpec) -> usize {
        spec.param_count()
    }

    fn prepare_state(&self, spec: &AnsatzSpec, theta: &[f64]) -> Result<StateVector> {
        self.prepare_state_capped(spec, theta, DEFAULT_MAX_QUBITS)
    }

    fn prepare_state_capped(&self, spec: &AnsatzSpec, theta: &[f64], max_qubits: usize) -> Result<StateVector> {
        spec.validate()?;
        let n = spec.num_qubits;
        if theta.len() != self.param_count(spec) {
            return Err(Error::LengthMismatch {
                what: "ansatz parameters",
                expected: self.param_count(spec),
                actual: theta.len(),
            });
        }
        let mut state = StateVector::zero(n, max_qubits)?;
        for (layer, column) in theta.chunks_exact(n).enumerate() {
            if layer > 0 {
                self.apply_inter_layer(&mut state);
            }
            for (q, &angle) in column.iter().enumerate() {
                state.apply_ry(q, angle);
            }
        }
        Ok(state)
    }
}

/// Hardware-efficient ansatz with a linear CNOT ladder `(q, q+1)` for
/// ascending `q` between rotation columns.
#[derive(Debug, Clone, Copy, Default)]
pub struct EntanglingAnsatz;

impl Ansatz for EntanglingAnsatz {
    fn name(&self) -> &'static str {
        "entangling"
    }

    fn apply_inter_layer(&self, state: &mut StateVector) {
        for q in 0..state.num_qubits().saturating_sub(1) {
            state.apply_cnot(q, q + 1);
        }
    }
}

/// Same rotations with a `T` gate on every qubit instead of CNOTs, so the
/// prepared state is always a product state.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProductAnsatz;

impl Ansatz for ProductAnsatz {
    fn name(&self) -> &'static str {
        "product"
    }

    fn apply_inter_layer(&self, state: &mut StateVector) {
        for q in 0..state.num_qubits() {
            state.apply_t(q);
        }
    }
}

/// Built-in families: `entangling` and `product`.
pub fn ansatz_families() -> &'static Registry<dyn Ansatz> {
    static REGISTRY: OnceLock<Registry<dyn Ansatz>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn Ansatz> = Registry::new("ansatz family");
        reg.register("entangling", Arc::new(EntanglingAnsatz))
            .register("product", Arc::new(ProductAnsatz));
        reg
    })
}

pub fn ansatz(name: &str) -> Result<Arc<dyn Ansatz>> {
    ansatz_families().get(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn param_counts() {
        assert_eq!(AnsatzSpec::new(3, 3).param_count(), 9);
        assert_eq!(AnsatzSpec::new(1, 1).param_count(), 1);
        assert_eq!(EntanglingAnsatz.param_count(&AnsatzSpec::new(4, 2)), 8);
    }

    #[test]
    fn zero_angles_give_zero_state() {
        let s = EntanglingAnsatz.prepare_state(&AnsatzSpec::new(3, 2), &[0.0; 6]).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn single_qubit_pi() {
        let s = ProductAnsatz.prepare_state(&AnsatzSpec::new(1, 1), &[PI]).unwrap();
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cnot_between_columns() {
        // qubit 0 flipped in column one, CNOT(0 -> 1) copies it
        let s = EntanglingAnsatz
            .prepare_state(&AnsatzSpec::new(2, 2), &[PI, 0.0, 0.0, 0.0])
            .unwrap();
        assert!((s.amplitudes()[0b11].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let err = EntanglingAnsatz.prepare_state(&AnsatzSpec::new(2, 2), &[0.0; 3]).unwrap_err();
        assert_eq!(err.kind(), "length_mismatch");
        assert!(EntanglingAnsatz.prepare_state(&AnsatzSpec::new(0, 1), &[]).is_err());
    }

    #[test]
    fn registry_names() {
        assert_eq!(ansatz("product").unwrap().name(), "product");
        assert_eq!(ansatz_families().names(), vec!["entangling", "product"]);
    }
}
