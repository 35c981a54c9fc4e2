//! CVaR-VQE on a classically simulated statevector.
//!
//! Every cost evaluation prepares the ansatz state, scores it with the
//! configured CVaR estimator and records the ground-state fidelity alongside,
//! so threshold crossings are known at evaluation granularity.

mod cobyla;
mod cvar;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::EnergyTable;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, tag};
use crate::simulator::{ansatz, AnsatzSpec, ParameterVector, DEFAULT_MAX_QUBITS};

pub use cobyla::{minimize, Minimization, OptimizerConfig};
pub use cvar::{
    cost_estimators, cvar_exact, cvar_from_samples, expectation, tail_count, CostEstimator,
    CostEstimatorFactory, CostSpec, ExactCvar, SampledCvar,
};

pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.01, 0.10];

/// I.i.d. uniform angles on `[0, 2π)`.
pub fn random_initial_params(spec: &AnsatzSpec, seed: u64) -> Result<ParameterVector> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..spec.param_count())
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect())
}

/// Everything a single run needs besides the problem and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub layers: usize,
    /// Name of a registered ansatz family.
    pub family: String,
    pub cost: CostSpec,
    /// Evaluation budget; `None` means 50 per qubit.
    #[serde(default)]
    pub max_evals: Option<usize>,
    #[serde(default = "default_rho_begin")]
    pub rho_begin: f64,
    #[serde(default = "default_rho_end")]
    pub rho_end: f64,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
}

fn default_rho_begin() -> f64 {
    OptimizerConfig::DEFAULT_RHO_BEGIN
}

fn default_rho_end() -> f64 {
    OptimizerConfig::DEFAULT_RHO_END
}

fn default_thresholds() -> Vec<f64> {
    DEFAULT_THRESHOLDS.to_vec()
}

impl VqeConfig {
    pub fn new(layers: usize, family: &str, cost: CostSpec) -> Self {
        Self {
            layers,
            family: family.to_string(),
            cost,
            max_evals: None,
            rho_begin: default_rho_begin(),
            rho_end: default_rho_end(),
            thresholds: default_thresholds(),
        }
    }

    pub fn optimizer(&self, num_qubits: usize) -> OptimizerConfig {
        OptimizerConfig {
            max_evals: self.max_evals.unwrap_or(50 * num_qubits),
            rho_begin: self.rho_begin,
            rho_end: self.rho_end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// 1-based position in the run.
    pub eval: usize,
    /// First 8 bytes of SHA-256 over the little-endian angles, in hex.
    pub theta_hash: String,
    pub cost: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCrossing {
    pub threshold: f64,
    /// First evaluation whose fidelity reached the threshold.
    pub first_eval: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<EvalRecord>,
    pub crossings: Vec<ThresholdCrossing>,
    pub best_cost: f64,
    /// Evaluation that produced `best_cost` (the first on ties).
    pub best_eval: usize,
    pub best_theta: Vec<f64>,
    /// Fidelity of the state the optimizer returns.
    pub final_fidelity: f64,
    pub total_evals: usize,
}

/// `RunTrace` without the per-evaluation history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub crossings: Vec<ThresholdCrossing>,
    pub best_cost: f64,
    pub best_eval: usize,
    pub final_fidelity: f64,
    pub total_evals: usize,
}

impl RunTrace {
    pub fn first_eval(&self, threshold: f64) -> Option<usize> {
        self.crossings
            .iter()
            .find(|c| c.threshold == threshold)
            .and_then(|c| c.first_eval)
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            crossings: self.crossings.clone(),
            best_cost: self.best_cost,
            best_eval: self.best_eval,
            final_fidelity: self.final_fidelity,
            total_evals: self.total_evals,
        }
    }

    /// CSV with header `eval,cost,fidelity`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eval", "cost", "fidelity"])?;
        for r in &self.records {
            w.write_record([r.eval.to_string(), r.cost.to_string(), r.fidelity.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("summary serializes")
    }

    /// Writes `trace.csv` and `summary.json` into `dir`.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join("trace.csv"))?)?;
        std::fs::write(dir.join("summary.json"), self.summary_json() + "\n")?;
        Ok(())
    }
}

pub fn theta_hash(theta: &[f64]) -> String {
    let mut h = Sha256::new();
    for t in theta {
        h.update(t.to_le_bytes());
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// One optimization run from `θ0 = random_initial_params(seed)`.
///
/// `ground_set` holds the basis states whose total probability is the
/// fidelity. Sampled-mode shots are seeded from `seed` and the evaluation
/// index, so the run is reproducible.
pub fn run_vqe(table: &EnergyTable, ground_set: &[u64], config: &VqeConfig, seed: u64) -> Result<RunTrace> {
    run_vqe_capped(table, ground_set, config, seed, DEFAULT_MAX_QUBITS)
}

pub fn run_vqe_capped(
    table: &EnergyTable,
    ground_set: &[u64],
    config: &VqeConfig,
    seed: u64,
    max_qubits: usize,
) -> Result<RunTrace> {
    if ground_set.is_empty() {
        return Err(Error::Empty("ground set"));
    }
    if let Some(&z) = ground_set.iter().find(|&&z| z as usize >= table.len()) {
        return Err(Error::InvalidArgument(format!(
            "ground state {z} outside a {}-qubit table",
            table.num_qubits()
        )));
    }
    let n = table.num_qubits();
    let spec = AnsatzSpec::new(n, config.layers);
    let family = ansatz(&config.family)?;
    let opt = config.optimizer(n);
    opt.validate()?;
    let mut estimator = config.cost.estimator(derive_seed(seed, &[tag("shots")]))?;
    let theta0 = random_initial_params(&spec, seed)?;

    let mut records: Vec<EvalRecord> = Vec::with_capacity(opt.max_evals);
    let result = minimize(
        |theta| {
            let state = family.prepare_state_capped(&spec, theta, max_qubits)?;
            let eval = records.len() + 1;
            let cost = estimator.cost(&state, table, eval);
            records.push(EvalRecord {
                eval,
                theta_hash: theta_hash(theta),
                cost,
                fidelity: state.fidelity(ground_set)?,
            });
            Ok(cost)
        },
        &theta0,
        &opt,
    )?;

    let crossings = config
        .thresholds
        .iter()
        .map(|&threshold| ThresholdCrossing {
            threshold,
            first_eval: records.iter().find(|r| r.fidelity >= threshold).map(|r| r.eval),
        })
        .collect();
    let best_eval = result
        .log
        .iter()
        .position(|(_, c)| *c == result.best_cost)
        .expect("best cost comes from the log")
        + 1;
    Ok(RunTrace {
        final_fidelity: records[best_eval - 1].fidelity,
        crossings,
        best_cost: result.best_cost,
        best_eval,
        best_theta: result.best_x,
        total_evals: records.len(),
        records,
    })
}
