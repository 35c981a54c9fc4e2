use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients smaller than this after merging are dropped.
pub const COEFF_DROP_TOLERANCE: f64 = 1e-12;

/// Memory cap for dense energy tables.
pub const DEFAULT_MAX_TABLE_QUBITS: usize = 24;

/// Relative tolerance used to collect (possibly degenerate) ground states.
pub const GROUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    /// Bit `p` set means the monomial contains `Z_p`.
    pub mask: u64,
}

impl PauliTerm {
    pub fn qubits(&self) -> Vec<usize> {
        (0..64).filter(|&p| self.mask >> p & 1 == 1).collect()
    }

    pub fn weight(&self) -> u32 {
        self.mask.count_ones()
    }

    /// `(-1)^popcount(mask & z)`
    #[inline]
    pub fn sign(&self, z: u64) -> f64 {
        if (self.mask & z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// A diagonal operator `c + Σ_t coeff_t Π_{p ∈ mask_t} Z_p`.
///
/// Terms are kept sorted by mask with distinct, nonzero masks.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliZPolynomial {
    num_qubits: usize,
    constant: f64,
    terms: Vec<PauliTerm>,
}

impl PauliZPolynomial {
    pub fn zero(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            constant: 0.0,
            terms: Vec::new(),
        }
    }

    /// Merges equal masks, folds the empty mask into the constant and drops
    /// near-zero coefficients.
    pub fn from_terms(
        num_qubits: usize,
        constant: f64,
        terms: impl IntoIterator<Item = (f64, u64)>,
    ) -> Self {
        let mut acc = PolynomialAccumulator::new(num_qubits);
        acc.add_constant(constant);
        for (c, m) in terms {
            acc.add(c, m);
        }
        acc.finish()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn coefficient(&self, mask: u64) -> f64 {
        if mask == 0 {
            return self.constant;
        }
        self.terms
            .binary_search_by_key(&mask, |t| t.mask)
            .map(|i| self.terms[i].coeff)
            .unwrap_or(0.0)
    }

    /// Energy of computational basis state `z` (qubit `p` is bit `p`).
    pub fn energy(&self, z: u64) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |e, t| e + t.coeff * t.sign(z))
    }

    /// Largest number of qubits any single term acts on.
    pub fn max_weight(&self) -> u32 {
        self.terms.iter().map(PauliTerm::weight).max().unwrap_or(0)
    }

    pub fn to_file(&self) -> HamiltonianFile {
        HamiltonianFile {
            num_qubits: self.num_qubits,
            constant: self.constant,
            terms: self
                .terms
                .iter()
                .map(|t| FileTerm {
                    coeff: t.coeff,
                    qubits: t.qubits(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &HamiltonianFile) -> Result<Self> {
        if file.num_qubits > 64 {
            return Err(Error::InvalidArgument(format!(
                "{} qubits do not fit a 64-bit mask",
                file.num_qubits
            )));
        }
        let mut terms = Vec::with_capacity(file.terms.len());
        for t in &file.terms {
            let mut mask = 0u64;
            for &q in &t.qubits {
                if q >= file.num_qubits {
                    return Err(Error::InvalidArgument(format!(
                        "term acts on qubit {q} of a {}-qubit operator",
                        file.num_qubits
                    )));
                }
                mask |= 1 << q;
            }
            terms.push((t.coeff, mask));
        }
        Ok(Self::from_terms(file.num_qubits, file.constant, terms))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("hamiltonian serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: HamiltonianFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_file(&file)
    }
}

/// Builder that accumulates monomials by mask.
pub(crate) struct PolynomialAccumulator {
    num_qubits: usize,
    constant: f64,
    coeffs: BTreeMap<u64, f64>,
}

impl PolynomialAccumulator {
    pub(crate) fn new(num_qubits: usize) -> Self {
        assert!(num_qubits <= 64, "masks are 64-bit");
        Self {
            num_qubits,
            constant: 0.0,
            coeffs: BTreeMap::new(),
        }
    }

    pub(crate) fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub(crate) fn add(&mut self, coeff: f64, mask: u64) {
        if mask == 0 {
            self.constant += coeff;
        } else {
            *self.coeffs.entry(mask).or_insert(0.0) += coeff;
        }
    }

    pub(crate) fn finish(self) -> PauliZPolynomial {
        PauliZPolynomial {
            num_qubits: self.num_qubits,
            constant: self.constant,
            terms: self
                .coeffs
                .into_iter()
                .filter(|(_, c)| c.abs() >= COEFF_DROP_TOLERANCE)
                .map(|(mask, coeff)| PauliTerm { coeff, mask })
                .collect(),
        }
    }
}

/// On-disk Hamiltonian schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub num_qubits: usize,
    pub constant: f64,
    pub terms: Vec<FileTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileTerm {
    pub coeff: f64,
    pub qubits: Vec<usize>,
}

/// Energy of every basis state of a diagonal Hamiltonian.
#[derive(Debug)]
pub struct EnergyTable {
    num_qubits: usize,
    energies: Vec<f64>,
    ascending: OnceLock<Vec<u32>>,
}

impl EnergyTable {
    pub fn from_energies(energies: Vec<f64>) -> Result<Self> {
        let len = energies.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "energy table length {len} is not a power of two"
            )));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            energies,
            ascending: OnceLock::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Basis indices sorted by ascending energy, ties by index.
    pub fn ascending_order(&self) -> &[u32] {
        self.ascending.get_or_init(|| {
            let mut order: Vec<u32> = (0..self.energies.len() as u32).collect();
            order.sort_by(|&a, &b| {
                self.energies[a as usize]
                    .total_cmp(&self.energies[b as usize])
                    .then(a.cmp(&b))
            });
            order
        })
    }
}

impl Clone for EnergyTable {
    fn clone(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            energies: self.energies.clone(),
            ascending: OnceLock::new(),
        }
    }
}

/// Dense table of `h`'s diagonal, capped at [`DEFAULT_MAX_TABLE_QUBITS`].
pub fn diagonal_energies(h: &PauliZPolynomial) -> Result<EnergyTable> {
    diagonal_energies_capped(h, DEFAULT_MAX_TABLE_QUBITS)
}

/// Places each coefficient at its mask and applies an unnormalized
/// Walsh-Hadamard transform, which yields `Σ_S c_S (-1)^|S ∧ z|` for every `z`.
pub fn diagonal_energies_capped(h: &PauliZPolynomial, max_qubits: usize) -> Result<EnergyTable> {
    let n = h.num_qubits();
    if n > max_qubits {
        return Err(Error::QubitCap {
            qubits: n,
            cap: max_qubits,
        });
    }
    let mut table = vec![0.0f64; 1 << n];
    table[0] = h.constant();
    for t in h.terms() {
        table[t.mask as usize] += t.coeff;
    }
    let mut half = 1;
    while half < table.len() {
        for block in table.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*u, *v);
                *u = a + b;
                *v = a - b;
            }
        }
        half *= 2;
    }
    EnergyTable::from_energies(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStates {
    pub energy: f64,
    /// Ascending basis indices.
    pub states: Vec<u64>,
}

/// All basis states within `1e-9 · max(1, |E_min|)` of the minimum.
pub fn ground_bitstrings(table: &EnergyTable) -> GroundStates {
    let e_min = table
        .energies()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let cutoff = e_min + GROUND_TOLERANCE * e_min.abs().max(1.0);
    GroundStates {
        energy: e_min,
        states: table
            .energies()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e <= cutoff)
            .map(|(z, _)| z as u64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn merging_and_folding() {
        let p = PauliZPolynomial::from_terms(3, 1.0, [(2.0, 0b01), (3.0, 0b01), (4.0, 0), (1e-14, 0b10)]);
        assert_eq!(p.constant(), 5.0);
        assert_eq!(p.terms(), &[PauliTerm { coeff: 5.0, mask: 0b01 }]);
        assert_eq!(p.coefficient(0b10), 0.0);
    }

    #[test]
    fn constant_table_is_uniform() {
        let t = diagonal_energies(&PauliZPolynomial::from_terms(3, 2.5, [])).unwrap();
        assert!(t.energies().iter().all(|&e| e == 2.5));
        assert_eq!(ground_bitstrings(&t).states.len(), 8);
    }

    #[test]
    fn single_z_alternates() {
        let t = diagonal_energies(&PauliZPolynomial::from_terms(2, 0.5, [(1.0, 1)])).unwrap();
        assert_eq!(t.energies(), &[1.5, -0.5, 1.5, -0.5]);
        assert_eq!(ground_bitstrings(&t).states, vec![1, 3]);
    }

    #[test]
    fn table_matches_term_evaluation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let terms: Vec<(f64, u64)> = (0..40)
            .map(|_| (rng.gen_range(-5.0..5.0), rng.gen_range(1..256u64)))
            .collect();
        let p = PauliZPolynomial::from_terms(8, rng.gen_range(-1.0..1.0), terms);
        let t = diagonal_energies(&p).unwrap();
        for _ in 0..100 {
            let z = rng.gen_range(0..256u64);
            assert!((t.energies()[z as usize] - p.energy(z)).abs() < 1e-10);
        }
    }

    #[test]
    fn qubit_cap() {
        let p = PauliZPolynomial::zero(10);
        assert!(matches!(diagonal_energies_capped(&p, 8), Err(Error::QubitCap { .. })));
    }

    #[test]
    fn ascending_order_breaks_ties_by_index() {
        let t = EnergyTable::from_energies(vec![3.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(t.ascending_order(), &[3, 1, 2, 0]);
    }

    #[test]
    fn file_round_trip() {
        let p = PauliZPolynomial::from_terms(4, -1.25, [(0.5, 0b0011), (2.0, 0b1000)]);
        let json = p.to_json_string();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["terms"][0]["qubits"], serde_json::json!([0, 1]));
        let back = PauliZPolynomial::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, p);
        let bad = HamiltonianFile {
            num_qubits: 2,
            constant: 0.0,
            terms: vec![FileTerm { coeff: 1.0, qubits: vec![5] }],
        };
        assert!(PauliZPolynomial::from_file(&bad).is_err());
    }
}
