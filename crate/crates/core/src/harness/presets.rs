//! Canned sweeps for the three studies: the binary-encoding main study, the
//! one-hot comparison and the four-gate scaling study.

use super::SweepConfig;
use crate::encoding::encoding;
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 3] = ["main", "onehot", "g4"];

/// Splits a problem size into `(|F|, |G|)` with `|G| ≥ 2` as large as
/// possible without exceeding `|F|`. Sizes with no such split (primes and
/// products below 4) fall back to `|G| = 2` when even.
pub fn factor_pair(size: usize) -> Option<(usize, usize)> {
    (2..=size / 2)
        .rev()
        .find(|&g| size.is_multiple_of(g) && g <= size / g)
        .map(|g| (size / g, g))
        .or_else(|| (size.is_multiple_of(2) && size >= 2).then_some((size / 2, 2)))
}

fn sizes_within(products: impl IntoIterator<Item = usize>, encoding_name: &str, max_qubits: usize) -> Vec<(usize, usize)> {
    let enc = encoding(encoding_name).expect("built-in encoding");
    products
        .into_iter()
        .filter_map(factor_pair)
        .filter(|&(f, g)| enc.num_qubits(f, g) <= max_qubits)
        .collect()
}

/// Binary encoding, `|F|·|G|` from 6 to 34 in steps of 2, both ansatz
/// families, every ξ and `l = 1, 2, 3`; sizes above `max_qubits` dropped.
pub fn preset_paper_main(max_qubits: usize) -> SweepConfig {
    SweepConfig {
        families: vec!["entangling".into(), "product".into()],
        encodings: vec!["binary".into()],
        max_qubits,
        ..SweepConfig::new(sizes_within((6..=34).step_by(2), "binary", max_qubits))
    }
}

/// One-hot encoding, `|F|·|G|` from 6 to 18 in steps of 2.
pub fn preset_onehot_appendix(max_qubits: usize) -> SweepConfig {
    SweepConfig {
        encodings: vec!["one_hot".into()],
        max_qubits,
        ..SweepConfig::new(sizes_within((6..=18).step_by(2), "one_hot", max_qubits))
    }
}

/// Four gates (two qubits per flight, no cyclic aliasing), `|F|` from 2 to 9,
/// with ξ matched to the two fidelity thresholds.
pub fn preset_g4_appendix(max_qubits: usize) -> SweepConfig {
    SweepConfig {
        xis: vec![0.01, 0.1],
        encodings: vec!["binary".into()],
        max_qubits,
        ..SweepConfig::new((2..=9).map(|f| (f, 4)).filter(|&(f, _)| 2 * f <= max_qubits).collect())
    }
}

pub fn preset(name: &str, max_qubits: usize) -> Result<SweepConfig> {
    let config = match name {
        "main" => preset_paper_main(max_qubits),
        "onehot" => preset_onehot_appendix(max_qubits),
        "g4" => preset_g4_appendix(max_qubits),
        _ => {
            return Err(Error::UnknownStrategy {
                kind: "preset",
                name: name.to_string(),
                available: PRESET_NAMES.join(", "),
            })
        }
    };
    if config.sizes.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "preset {name} has no size within {max_qubits} qubits"
        )));
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorizations() {
        assert_eq!(factor_pair(6), Some((3, 2)));
        assert_eq!(factor_pair(12), Some((4, 3)));
        assert_eq!(factor_pair(14), Some((7, 2)));
        assert_eq!(factor_pair(16), Some((4, 4)));
        assert_eq!(factor_pair(18), Some((6, 3)));
        assert_eq!(factor_pair(30), Some((6, 5)));
        assert_eq!(factor_pair(4), Some((2, 2)));
        assert_eq!(factor_pair(7), None);
    }

    #[test]
    fn main_preset() {
        let c = preset_paper_main(18);
        assert_eq!(c.xis, vec![0.01, 0.1, 0.25, 1.0]);
        assert_eq!(c.layer_counts, vec![1, 2, 3]);
        assert_eq!((c.instances_per_size, c.restarts_per_instance), (50, 5));
        assert_eq!(c.sizes.len(), 15);
        assert!(c.sizes.iter().all(|&(f, g)| f * g % 2 == 0 && f * g <= 34));
        c.validate().unwrap();
        assert_eq!(preset_paper_main(10).sizes, vec![(3, 2), (4, 2), (5, 2), (4, 3), (7, 2), (4, 4), (5, 4)]);
    }

    #[test]
    fn onehot_preset() {
        let c = preset_onehot_appendix(18);
        assert_eq!(c.sizes, vec![(3, 2), (4, 2), (5, 2), (4, 3), (7, 2), (4, 4), (6, 3)]);
        c.validate().unwrap();
    }

    #[test]
    fn g4_preset() {
        let c = preset_g4_appendix(18);
        assert_eq!(c.sizes, (2..=9).map(|f| (f, 4)).collect::<Vec<_>>());
        let enc = encoding("binary").unwrap();
        let qubits: Vec<usize> = c.sizes.iter().map(|&(f, g)| enc.num_qubits(f, g)).collect();
        assert_eq!(qubits, vec![4, 6, 8, 10, 12, 14, 16, 18]);
        assert!(preset("g4", 3).is_err());
        assert_eq!(preset("gx", 18).unwrap_err().kind(), "unknown_strategy");
    }
}
