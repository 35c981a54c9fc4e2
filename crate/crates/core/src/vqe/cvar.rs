//! Conditional value at risk of the measured energy distribution.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::encoding::EnergyTable;
use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::seed::derive_seed;
use crate::simulator::StateVector;

fn check_xi(xi: f64) -> Result<()> {
    if xi > 0.0 && xi <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("xi = {xi} is outside (0, 1]")))
    }
}

/// `⌈ξK⌉`, treating products within rounding of an integer as that integer
/// (0.3 · 10 is 3, not 4).
pub fn tail_count(xi: f64, shots: usize) -> usize {
    let x = xi * shots as f64;
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() };
    (n as usize).clamp(1, shots)
}

/// Mean of the lowest `⌈ξK⌉` of `K` sampled energies.
pub fn cvar_from_samples(energies: &[f64], xi: f64) -> Result<f64> {
    check_xi(xi)?;
    if energies.is_empty() {
        return Err(Error::Empty("sampled energies"));
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = tail_count(xi, sorted.len());
    Ok(sorted[..k].iter().sum::<f64>() / k as f64)
}

fn check_distribution(probs: &[f64], table: &EnergyTable) -> Result<()> {
    if probs.len() != table.len() {
        return Err(Error::LengthMismatch {
            what: "probability vector",
            expected: table.len(),
            actual: probs.len(),
        });
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// CVaR of the exact distribution: the lowest-energy states are taken in
/// full until their mass reaches ξ, the boundary state contributes only the
/// remaining fraction, and the weighted sum is normalized by ξ.
pub fn cvar_exact(probs: &[f64], table: &EnergyTable, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    check_distribution(probs, table)?;
    Ok(cvar_sorted(probs, table, xi))
}

pub(crate) fn cvar_sorted(probs: &[f64], table: &EnergyTable, xi: f64) -> f64 {
    let energies = table.energies();
    let mut mass = 0.0;
    let mut weighted = 0.0;
    for &z in table.ascending_order() {
        let p = probs[z as usize];
        if p == 0.0 {
            continue;
        }
        let w = p.min(xi - mass);
        weighted += w * energies[z as usize];
        mass += w;
        if mass >= xi {
            break;
        }
    }
    // mass equals ξ up to rounding, or falls just short of it when ξ = 1
    weighted / mass
}

/// `Σ_z p_z E_z`
pub fn expectation(probs: &[f64], table: &EnergyTable) -> Result<f64> {
    check_distribution(probs, table)?;
    Ok(probs.iter().zip(table.energies()).map(|(p, e)| p * e).sum())
}

/// Aggregation parameters of the VQE cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub xi: f64,
    /// Name of a registered estimator: `exact` or `sampled`.
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
}

impl CostSpec {
    pub fn exact(xi: f64) -> Self {
        Self {
            xi,
            mode: "exact".into(),
            shots: None,
        }
    }

    pub fn sampled(xi: f64, shots: usize) -> Self {
        Self {
            xi,
            mode: "sampled".into(),
            shots: Some(shots),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_xi(self.xi)?;
        cost_estimators().get(&self.mode)?;
        if self.mode == "sampled" && !matches!(self.shots, Some(k) if k >= 1) {
            return Err(Error::InvalidConfig("sampled mode needs shots >= 1".into()));
        }
        Ok(())
    }

    /// Builds the estimator named by `mode`; `seed` drives shot sampling.
    pub fn estimator(&self, seed: u64) -> Result<Box<dyn CostEstimator>> {
        self.validate()?;
        cost_estimators().get(&self.mode)?.build(self, seed)
    }
}

/// Maps a prepared state to the scalar the optimizer minimizes.
pub trait CostEstimator: Send {
    /// `eval` is the 1-based evaluation index within a run.
    fn cost(&mut self, state: &StateVector, table: &EnergyTable, eval: usize) -> f64;
}

pub trait CostEstimatorFactory: Send + Sync {
    fn build(&self, spec: &CostSpec, seed: u64) -> Result<Box<dyn CostEstimator>>;
}

/// Noise-free CVaR from the full Born distribution.
#[derive(Debug, Clone, Copy)]
pub struct ExactCvar {
    pub xi: f64,
}

impl CostEstimator for ExactCvar {
    fn cost(&mut self, state: &StateVector, table: &EnergyTable, _eval: usize) -> f64 {
        cvar_sorted(&state.probabilities(), table, self.xi)
    }
}

/// CVaR estimated from `shots` measurements, reseeded per evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SampledCvar {
    pub xi: f64,
    pub shots: usize,
    pub seed: u64,
}

impl CostEstimator for SampledCvar {
    fn cost(&mut self, state: &StateVector, table: &EnergyTable, eval: usize) -> f64 {
        let shots = state.sample(self.shots, derive_seed(self.seed, &[eval as u64]));
        let energies: Vec<f64> = shots
            .iter()
            .map(|&z| table.energies()[z as usize])
            .collect();
        cvar_from_samples(&energies, self.xi).expect("shots >= 1 and xi validated")
    }
}

struct ExactFactory;

impl CostEstimatorFactory for ExactFactory {
    fn build(&self, spec: &CostSpec, _seed: u64) -> Result<Box<dyn CostEstimator>> {
        Ok(Box::new(ExactCvar { xi: spec.xi }))
    }
}

struct SampledFactory;

impl CostEstimatorFactory for SampledFactory {
    fn build(&self, spec: &CostSpec, seed: u64) -> Result<Box<dyn CostEstimator>> {
        let shots = spec
            .shots
            .filter(|&k| k >= 1)
            .ok_or_else(|| Error::InvalidConfig("sampled mode needs shots >= 1".into()))?;
        Ok(Box::new(SampledCvar {
            xi: spec.xi,
            shots,
            seed,
        }))
    }
}

/// Built-in estimators: `exact` and `sampled`.
pub fn cost_estimators() -> &'static Registry<dyn CostEstimatorFactory> {
    static REGISTRY: OnceLock<Registry<dyn CostEstimatorFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn CostEstimatorFactory> = Registry::new("cost mode");
        reg.register("exact", Arc::new(ExactFactory))
            .register("sampled", Arc::new(SampledFactory));
        reg
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(e: &[f64]) -> EnergyTable {
        EnergyTable::from_energies(e.to_vec()).unwrap()
    }

    #[test]
    fn sampled_examples() {
        let e = [3.0, 1.0, 4.0, 2.0];
        assert_eq!(cvar_from_samples(&e, 0.5).unwrap(), 1.5);
        assert_eq!(cvar_from_samples(&e, 1.0).unwrap(), 2.5);
        assert_eq!(cvar_from_samples(&e, 0.01).unwrap(), 1.0);
        assert!(cvar_from_samples(&[], 0.5).is_err());
        assert!(cvar_from_samples(&e, 0.0).is_err());
    }

    #[test]
    fn tail_count_rounding() {
        assert_eq!(tail_count(0.3, 10), 3);
        assert_eq!(tail_count(0.1, 10), 1);
        assert_eq!(tail_count(0.31, 10), 4);
        assert_eq!(tail_count(1e-6, 10), 1);
    }

    #[test]
    fn exact_examples() {
        let t = table(&[0.0, 2.0]);
        let p = [0.5, 0.5];
        assert_eq!(cvar_exact(&p, &t, 0.25).unwrap(), 0.0);
        assert!((cvar_exact(&p, &t, 0.75).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cvar_exact(&p, &t, 1.0).unwrap(), 1.0);
        assert_eq!(expectation(&p, &t).unwrap(), 1.0);
        assert!(cvar_exact(&p, &t, 1.5).is_err());
        assert!(cvar_exact(&[0.5, 0.4], &t, 0.5).is_err());
        assert!(cvar_exact(&[1.0], &t, 0.5).is_err());
    }

    #[test]
    fn exact_skips_zero_mass_states() {
        let t = table(&[-5.0, 1.0, 2.0, 3.0]);
        let p = [0.0, 0.5, 0.0, 0.5];
        assert_eq!(cvar_exact(&p, &t, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn cost_spec_validation() {
        assert!(CostSpec::exact(0.1).validate().is_ok());
        assert!(CostSpec::sampled(0.1, 0).validate().is_err());
        let spec = CostSpec {
            mode: "median".into(),
            ..CostSpec::exact(0.1)
        };
        assert_eq!(spec.validate().unwrap_err().kind(), "unknown_strategy");
    }
}
