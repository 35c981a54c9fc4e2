//! One-hot encoding: one binary variable per (flight, gate), penalties for
//! both constraints, and the Ising form obtained from `x = (1 - Z) / 2`.

use serde::{Deserialize, Serialize};

use super::pauli::{PauliZPolynomial, PolynomialAccumulator};
use super::Penalties;
use crate::error::{Error, Result};
use crate::instance::{forbidden_pairs, FlightGateInstance};

/// `Q(x) = c + Σ_p h_p x_p + Σ_{p,q} J_pq x_p x_q` over `N = |F|·|G|`
/// variables indexed `p = i·|G| + α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboProblem {
    pub constant: f64,
    pub linear: Vec<f64>,
    /// Row-major `N × N`.
    pub quadratic: Vec<f64>,
}

impl QuboProblem {
    pub fn zero(n: usize) -> Self {
        Self {
            constant: 0.0,
            linear: vec![0.0; n],
            quadratic: vec![0.0; n * n],
        }
    }

    pub fn num_variables(&self) -> usize {
        self.linear.len()
    }

    #[inline]
    pub fn j(&self, p: usize, q: usize) -> f64 {
        self.quadratic[p * self.num_variables() + q]
    }

    pub fn value(&self, bits: &[bool]) -> Result<f64> {
        let n = self.num_variables();
        if bits.len() != n {
            return Err(Error::LengthMismatch {
                what: "qubo bits",
                expected: n,
                actual: bits.len(),
            });
        }
        let mut v = self.constant;
        for p in (0..n).filter(|&p| bits[p]) {
            v += self.linear[p];
            for q in (0..n).filter(|&q| bits[q]) {
                v += self.j(p, q);
            }
        }
        Ok(v)
    }

    /// Value at the bit vector stored in the low bits of `z`.
    pub fn value_at(&self, z: u64) -> f64 {
        let bits: Vec<bool> = (0..self.num_variables()).map(|p| z >> p & 1 == 1).collect();
        self.value(&bits).expect("length matches by construction")
    }
}

pub fn build_qubo(inst: &FlightGateInstance, penalties: Penalties) -> QuboProblem {
    let f = inst.num_flights;
    let g = inst.num_gates;
    let n = f * g;
    let idx = |i: usize, a: usize| i * g + a;
    let pairs = forbidden_pairs(inst);
    let lambda_one = penalties.one;
    let lambda_not = penalties.not;

    let mut q = QuboProblem::zero(n);
    q.constant = f as f64 * lambda_one;
    for i in 0..f {
        for a in 0..g {
            q.linear[idx(i, a)] =
                (inst.n_arr[i] * inst.t_arr[a] + inst.n_dep[i] * inst.t_dep[a]) as f64 - 2.0 * lambda_one;
        }
    }
    for i in 0..f {
        for j in 0..f {
            let forbidden = pairs.contains(i, j);
            for a in 0..g {
                for b in 0..g {
                    let mut v = (inst.n_trans[i][j] * inst.t_gate[a][b]) as f64;
                    if i == j {
                        v += lambda_one;
                    }
                    if a == b && forbidden {
                        v += lambda_not;
                    }
                    q.quadratic[idx(i, a) * n + idx(j, b)] = v;
                }
            }
        }
    }
    q
}

/// Substitutes `x_p = (1 - Z_p) / 2`.
///
/// Diagonal entries `J_pp` multiply `x_p^2 = x_p`, so they contribute
/// `J_pp / 2` to the constant and `-J_pp / 2` to `Z_p`; the symmetric sum
/// below already carries the `Z_p` part and `Z_p Z_p = I` carries the rest.
pub fn qubo_to_ising(q: &QuboProblem) -> PauliZPolynomial {
    let n = q.num_variables();
    let mut acc = PolynomialAccumulator::new(n);
    let sum_h: f64 = q.linear.iter().sum();
    let sum_j: f64 = q.quadratic.iter().sum();
    let trace_j: f64 = (0..n).map(|p| q.j(p, p)).sum();
    acc.add_constant(q.constant + 0.5 * sum_h + 0.25 * sum_j + 0.25 * trace_j);
    for p in 0..n {
        let row_col: f64 = (0..n).map(|r| q.j(p, r) + q.j(r, p)).sum();
        acc.add(-0.5 * q.linear[p] - 0.25 * row_col, 1 << p);
        for r in p + 1..n {
            acc.add(0.25 * (q.j(p, r) + q.j(r, p)), (1 << p) | (1 << r));
        }
    }
    acc.finish()
}
