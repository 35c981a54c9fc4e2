use proptest::prelude::*;

use fga_core::encoding::EnergyTable;
use fga_core::harness::{curve_grid, fraction_reaching, RunKey, RunRecord};
use fga_core::simulator::{ansatz, AnsatzSpec};
use fga_core::vqe::{
    cvar_exact, cvar_from_samples, expectation, minimize, tail_count, OptimizerConfig, ThresholdCrossing,
};

fn distribution() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=5).prop_flat_map(|n| {
        let len = 1 << n;
        (
            prop::collection::vec(-50i32..50, len),
            prop::collection::vec(0.0f64..1.0, len),
        )
            .prop_filter_map("zero mass", |(e, w)| {
                let total: f64 = w.iter().sum();
                (total > 1e-3).then(|| (e.into_iter().map(f64::from).collect(), w.iter().map(|x| x / total).collect()))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cvar_is_monotone_and_bounded((energies, probs) in distribution(), a in 0.001f64..1.0, b in 0.001f64..1.0) {
        let table = EnergyTable::from_energies(energies.clone()).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let c_lo = cvar_exact(&probs, &table, lo).unwrap();
        let c_hi = cvar_exact(&probs, &table, hi).unwrap();
        let mean = expectation(&probs, &table).unwrap();
        let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(c_lo <= c_hi + 1e-9);
        prop_assert!(min - 1e-9 <= c_lo);
        prop_assert!(c_hi <= mean + 1e-9);
        prop_assert!((cvar_exact(&probs, &table, 1.0).unwrap() - mean).abs() <= 1e-9);
    }

    #[test]
    fn cvar_shifts_with_energy((energies, probs) in distribution(), xi in 0.001f64..=1.0, shift in -100.0f64..100.0) {
        let table = EnergyTable::from_energies(energies.clone()).unwrap();
        let shifted = EnergyTable::from_energies(energies.iter().map(|e| e + shift).collect()).unwrap();
        let c = cvar_exact(&probs, &table, xi).unwrap();
        let s = cvar_exact(&probs, &shifted, xi).unwrap();
        prop_assert!((s - c - shift).abs() <= 1e-8);
    }

    #[test]
    fn sampled_cvar_matches_empirical_distribution(
        samples in prop::collection::vec(0usize..8, 1..60),
        energies in prop::collection::vec(-10i32..10, 8),
        m in 1usize..60,
    ) {
        let k = samples.len();
        let m = m.min(k);
        let table = EnergyTable::from_energies(energies.iter().map(|&e| f64::from(e)).collect()).unwrap();
        let mut probs = vec![0.0; 8];
        for &z in &samples {
            probs[z] += 1.0 / k as f64;
        }
        let drawn: Vec<f64> = samples.iter().map(|&z| table.energies()[z]).collect();
        let xi = m as f64 / k as f64;
        prop_assert_eq!(tail_count(xi, k), m);
        let exact = cvar_exact(&probs, &table, xi).unwrap();
        let sampled = cvar_from_samples(&drawn, xi).unwrap();
        prop_assert!((exact - sampled).abs() <= 1e-9);
    }

    #[test]
    fn optimizer_respects_budget(budget in 1usize..80, dim in 1usize..6, offset in -3.0f64..3.0) {
        let x0 = vec![0.0; dim];
        let result = minimize(
            |x| Ok(x.iter().map(|v| (v - offset).powi(2)).sum()),
            &x0,
            &OptimizerConfig::with_budget(budget),
        )
        .unwrap();
        prop_assert!(result.evals <= budget);
        prop_assert_eq!(result.log.len(), result.evals);
        let min = result.log.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(result.best_cost, min);
        prop_assert!(result.best_cost <= result.log[0].1);
    }

    #[test]
    fn ansatz_states_are_normalized(n in 1usize..9, layers in 1usize..4, seed in any::<u64>(), product in any::<bool>()) {
        let spec = AnsatzSpec::new(n, layers);
        let theta = fga_core::vqe::random_initial_params(&spec, seed).unwrap();
        let family = if product { "product" } else { "entangling" };
        let state = ansatz(family).unwrap().prepare_state(&spec, &theta).unwrap();
        prop_assert!((state.norm() - 1.0).abs() < 1e-10);
        let total: f64 = state.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fraction_curves_are_monotone(
        runs in prop::collection::vec((prop::option::of(1usize..200), prop::option::of(1usize..200)), 1..40),
        n in 2usize..12,
    ) {
        let records: Vec<RunRecord> = runs
            .iter()
            .enumerate()
            .map(|(i, &(strict, loose))| {
                // a 1% crossing implies a 10% crossing no later
                let loose = match (strict, loose) {
                    (Some(s), Some(l)) => Some(s.min(l)),
                    (Some(s), None) => Some(s),
                    (None, l) => l,
                };
                record(i, n, strict, loose)
            })
            .collect();
        let grid = curve_grid(0.5, 50.0);
        let strict = fraction_reaching(&records, 0.01, &grid).unwrap();
        let loose = fraction_reaching(&records, 0.10, &grid).unwrap();
        prop_assert!(strict.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(loose.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(strict.iter().zip(&loose).all(|(s, l)| s <= l && *l <= 1.0));
    }
}

fn record(restart: usize, n: usize, strict: Option<usize>, loose: Option<usize>) -> RunRecord {
    RunRecord {
        key: RunKey {
            num_flights: 3,
            num_gates: 2,
            encoding: "binary".into(),
            instance_id: 0,
            family: "entangling".into(),
            layers: 3,
            xi: 0.1,
            restart,
        },
        n_qubits: n,
        seed: 0,
        evals_used: 50 * n,
        crossings: vec![
            ThresholdCrossing { threshold: 0.01, first_eval: strict },
            ThresholdCrossing { threshold: 0.10, first_eval: loose },
        ],
        final_fidelity: 0.0,
        best_cost: 0.0,
        optimal_time: 0.0,
        ground_degeneracy: 1,
        error: None,
    }
}
