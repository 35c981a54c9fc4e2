use serde::{Deserialize, Serialize};

use super::{forbidden_pairs, travel_time_parts_unchecked, Assignment, FlightGateInstance, ForbiddenPairs};
use crate::error::{Error, Result};

/// Largest `|G|^|F|` that exhaustive enumeration will visit.
pub const MAX_ASSIGNMENTS: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub optimal_time: f64,
    /// Every feasible assignment attaining `optimal_time`, in lexicographic
    /// order of gate vectors.
    pub optima: Vec<Assignment>,
}

/// Calls `visit(gate_of, time)` for every feasible assignment, in
/// lexicographic order of gate vectors.
fn for_each_feasible(
    inst: &FlightGateInstance,
    pairs: &ForbiddenPairs,
    mut visit: impl FnMut(&[usize], f64),
) -> Result<()> {
    let total = inst.assignment_count();
    if total > MAX_ASSIGNMENTS {
        return Err(Error::EnumerationCap {
            requested: total,
            cap: MAX_ASSIGNMENTS,
        });
    }
    let pair_list: Vec<(usize, usize)> = pairs.iter().collect();
    let f = inst.num_flights;
    let g = inst.num_gates;
    let mut gate_of = vec![0usize; f];
    loop {
        if pair_list.iter().all(|&(i, j)| gate_of[i] != gate_of[j]) {
            visit(&gate_of, travel_time_parts_unchecked(inst, &gate_of).total());
        }
        // odometer, last flight fastest
        let mut k = f;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            gate_of[k] += 1;
            if gate_of[k] < g {
                break;
            }
            gate_of[k] = 0;
        }
    }
}

/// Brute-force optimum over all `|G|^|F|` assignments.
pub fn solve_exact(inst: &FlightGateInstance) -> Result<ExactSolution> {
    let pairs = forbidden_pairs(inst);
    let mut best = f64::INFINITY;
    let mut optima = Vec::new();
    for_each_feasible(inst, &pairs, |gate_of, t| {
        // integer data, so ties are exact
        if t < best {
            best = t;
            optima.clear();
        }
        if t == best {
            optima.push(Assignment::new(gate_of.to_vec()));
        }
    })?;
    if optima.is_empty() {
        return Err(Error::NoFeasibleAssignment);
    }
    Ok(ExactSolution {
        optimal_time: best,
        optima,
    })
}

/// Backtracking gate coloring; much cheaper than enumeration for large
/// instances.
pub fn has_feasible_assignment(inst: &FlightGateInstance, pairs: &ForbiddenPairs) -> bool {
    let f = inst.num_flights;
    let mut adj = vec![Vec::new(); f];
    for (i, j) in pairs.iter() {
        adj[i].push(j);
        adj[j].push(i);
    }
    fn place(flight: usize, adj: &[Vec<usize>], gates: usize, gate_of: &mut [Option<usize>]) -> bool {
        if flight == gate_of.len() {
            return true;
        }
        for g in 0..gates {
            if adj[flight].iter().all(|&o| gate_of[o] != Some(g)) {
                gate_of[flight] = Some(g);
                if place(flight + 1, adj, gates, gate_of) {
                    return true;
                }
            }
        }
        gate_of[flight] = None;
        false
    }
    place(0, &adj, inst.num_gates, &mut vec![None; f])
}

/// Fewer near-optimal assignments means a harder instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyProxy {
    /// Feasible assignments within 5% of the optimum (the optima included).
    pub near_optimal: u64,
    pub feasible: u64,
}

pub fn difficulty_proxy(inst: &FlightGateInstance) -> Result<DifficultyProxy> {
    let pairs = forbidden_pairs(inst);
    let mut times = Vec::new();
    for_each_feasible(inst, &pairs, |_, t| times.push(t))?;
    let best = times.iter().copied().fold(f64::INFINITY, f64::min);
    if times.is_empty() {
        return Err(Error::NoFeasibleAssignment);
    }
    let cutoff = best * 1.05;
    Ok(DifficultyProxy {
        near_optimal: times.iter().filter(|&&t| t <= cutoff).count() as u64,
        feasible: times.len() as u64,
    })
}

/// Pool indices ordered hardest first: fewest near-optima, then the larger
/// feasible set, then pool order.
pub fn rank_by_difficulty(pool: &[FlightGateInstance]) -> Result<Vec<usize>> {
    let proxies = pool
        .iter()
        .map(difficulty_proxy)
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (proxies[a], proxies[b]);
        pa.near_optimal
            .cmp(&pb.near_optimal)
            .then(pb.feasible.cmp(&pa.feasible))
            .then(a.cmp(&b))
    });
    Ok(order)
}

/// Keeps the `keep` hardest instances of `pool`, hardest first.
pub fn difficulty_filter(pool: &[FlightGateInstance], keep: usize) -> Result<Vec<FlightGateInstance>> {
    if keep > pool.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {keep} instances from a pool of {}",
            pool.len()
        )));
    }
    Ok(rank_by_difficulty(pool)?
        .into_iter()
        .take(keep)
        .map(|i| pool[i].clone())
        .collect())
}
