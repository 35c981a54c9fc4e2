use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{forbidden_pairs, has_feasible_assignment, FlightGateInstance};
use crate::error::{Error, Result};

pub const MAX_GENERATION_ATTEMPTS: usize = 1000;

/// Parameters of the random instance generator.
///
/// Gates sit at distinct integer positions `1..=concourse_length` on a
/// straight concourse with baggage claim at position 0 and security at
/// `concourse_length + 1`. Gate-to-gate times are position differences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub num_flights: usize,
    pub num_gates: usize,
    pub max_passengers: u64,
    /// Arrival times are drawn from `[0, time_horizon)`.
    pub time_horizon: u64,
    pub min_duration: u64,
    pub max_duration: u64,
    pub t_buf: u64,
    /// Pool size multiplier for difficulty filtering; 1 disables filtering.
    #[serde(default = "default_pool_factor")]
    pub difficulty_pool_factor: usize,
    #[serde(default = "default_concourse_length")]
    pub concourse_length: u64,
}

fn default_pool_factor() -> usize {
    1
}

fn default_concourse_length() -> u64 {
    20
}

impl GenerationConfig {
    /// Defaults that keep roughly half of the gates busy at any moment, so
    /// forbidden pairs are common but the gate-coloring stays solvable.
    pub fn for_size(num_flights: usize, num_gates: usize) -> Self {
        let (min_duration, max_duration, t_buf) = (30, 90, 15);
        let occupancy = (min_duration + max_duration) / 2 + t_buf;
        let horizon = (occupancy * num_flights as u64 * 4).div_ceil(3 * num_gates.max(1) as u64);
        Self {
            num_flights,
            num_gates,
            max_passengers: 100,
            time_horizon: horizon.max(num_flights as u64),
            min_duration,
            max_duration,
            t_buf,
            difficulty_pool_factor: 1,
            concourse_length: default_concourse_length().max(num_gates as u64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.num_flights == 0 || self.num_gates == 0 {
            return bad("num_flights and num_gates must be positive");
        }
        if self.max_passengers == 0 {
            return bad("max_passengers must be positive");
        }
        if self.time_horizon < self.num_flights as u64 {
            return bad("time_horizon must admit distinct arrival times for every flight");
        }
        if self.min_duration == 0 || self.min_duration > self.max_duration {
            return bad("need 0 < min_duration <= max_duration");
        }
        if self.difficulty_pool_factor == 0 {
            return bad("difficulty_pool_factor must be at least 1");
        }
        if self.concourse_length < self.num_gates as u64 {
            return bad("concourse_length must fit every gate at a distinct position");
        }
        Ok(())
    }
}

/// Draws a random instance. The same `(config, seed)` always gives the same
/// instance. Draws are repeated until the instance has at least one
/// forbidden pair (for two or more flights) and a feasible assignment.
pub fn generate_instance(config: &GenerationConfig, seed: u64) -> Result<FlightGateInstance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let inst = draw(config, &mut rng);
        debug_assert!(inst.validate().is_ok());
        let pairs = forbidden_pairs(&inst);
        if config.num_flights >= 2 && pairs.is_empty() {
            continue;
        }
        if !has_feasible_assignment(&inst, &pairs) {
            continue;
        }
        return Ok(inst);
    }
    Err(Error::RetryCapExceeded {
        attempts: MAX_GENERATION_ATTEMPTS,
        reason: "no draw had both a forbidden pair and a feasible assignment".into(),
    })
}

fn draw(config: &GenerationConfig, rng: &mut ChaCha8Rng) -> FlightGateInstance {
    let f = config.num_flights;
    let g = config.num_gates;
    let passengers = |rng: &mut ChaCha8Rng| rng.gen_range(0..=config.max_passengers);

    let n_arr: Vec<u64> = (0..f).map(|_| passengers(rng)).collect();
    let n_dep: Vec<u64> = (0..f).map(|_| passengers(rng)).collect();
    let n_trans: Vec<Vec<u64>> = (0..f)
        .map(|i| {
            (0..f)
                .map(|j| if i == j { 0 } else { passengers(rng) })
                .collect()
        })
        .collect();

    // Distinct arrival times: the forbidden-pair predicate is strict in t_in,
    // so simultaneous arrivals would never conflict.
    let t_in: Vec<u64> = index::sample(rng, config.time_horizon as usize, f)
        .into_iter()
        .map(|t| t as u64)
        .collect();
    let t_out: Vec<u64> = t_in
        .iter()
        .map(|&t| t + rng.gen_range(config.min_duration..=config.max_duration))
        .collect();

    let mut positions: Vec<u64> = index::sample(rng, config.concourse_length as usize, g)
        .into_iter()
        .map(|p| p as u64 + 1)
        .collect();
    positions.sort_unstable();
    let t_arr = positions.clone();
    let t_dep = positions
        .iter()
        .map(|&p| config.concourse_length + 1 - p)
        .collect();
    let t_gate = positions
        .iter()
        .map(|&a| positions.iter().map(|&b| a.abs_diff(b)).collect())
        .collect();

    FlightGateInstance {
        num_flights: f,
        num_gates: g,
        n_arr,
        n_dep,
        n_trans,
        t_arr,
        t_dep,
        t_gate,
        t_in,
        t_out,
        t_buf: config.t_buf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn satisfies_invariants() {
        let cfg = GenerationConfig::for_size(2, 2);
        let inst = generate_instance(&cfg, 7).unwrap();
        inst.validate().unwrap();
        for a in 0..2 {
            assert_eq!(inst.t_gate[a][a], 0);
            for b in 0..2 {
                assert_eq!(inst.t_gate[a][b], inst.t_gate[b][a]);
            }
        }
        assert!(!forbidden_pairs(&inst).is_empty());
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = GenerationConfig::for_size(5, 3);
        let a = generate_instance(&cfg, 11).unwrap();
        let b = generate_instance(&cfg, 11).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        let c = generate_instance(&cfg, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn seeds_give_different_transfers() {
        let cfg = GenerationConfig::for_size(4, 2);
        let a = generate_instance(&cfg, 1).unwrap();
        let b = generate_instance(&cfg, 2).unwrap();
        assert_ne!(a.n_trans, b.n_trans);
    }

    #[test]
    fn retry_cap_on_unreachable_overlap() {
        // Flights last one minute and arrivals are spread over a huge
        // horizon, so two flights practically never overlap.
        let cfg = GenerationConfig {
            time_horizon: 10_000_000,
            min_duration: 1,
            max_duration: 1,
            t_buf: 0,
            ..GenerationConfig::for_size(2, 2)
        };
        let err = generate_instance(&cfg, 3).unwrap_err();
        assert_eq!(err.kind(), "retry_cap_exceeded");
    }

    #[test]
    fn rejects_invalid_config() {
        let cfg = GenerationConfig {
            min_duration: 50,
            max_duration: 10,
            ..GenerationConfig::for_size(3, 2)
        };
        assert!(generate_instance(&cfg, 0).is_err());
        let cfg = GenerationConfig {
            difficulty_pool_factor: 0,
            ..GenerationConfig::for_size(3, 2)
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_flight_needs_no_pair() {
        let inst = generate_instance(&GenerationConfig::for_size(1, 3), 5).unwrap();
        assert_eq!(inst.num_flights, 1);
        assert!(forbidden_pairs(&inst).is_empty());
    }
}
