//! Deterministic parameter sweeps and their reports.
//!
//! A sweep walks sizes × instances × encodings and, per instance, runs every
//! (restart, ξ, layers, family) combination. Each run gets its own seed from
//! [`derive_seed`] over its identifying coordinates, so results do not depend
//! on scheduling or on which runs were already on disk when a sweep resumed.

mod presets;
mod report;

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{default_penalties, diagonal_energies_capped, encoding, ground_bitstrings, EnergyTable};
use crate::error::{Error, Result};
use crate::instance::{
    difficulty_filter, generate_instance, solve_exact, FlightGateInstance, GenerationConfig,
};
use crate::seed::{derive_seed, tag};
use crate::simulator::{ansatz, DEFAULT_MAX_QUBITS};
use crate::vqe::{run_vqe_capped, CostSpec, ThresholdCrossing, VqeConfig, DEFAULT_THRESHOLDS};

pub use presets::{
    factor_pair, preset, preset_g4_appendix, preset_onehot_appendix, preset_paper_main, PRESET_NAMES,
};
pub use report::{
    average_evals_to_threshold, config_hash, curve_grid, curve_panels, export_report, fraction_reaching,
    load_records, scaling_rows, summarize, CurvePanel, Manifest, ScalingRow, SizeEntry, SummaryRow,
    ThresholdStats,
};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const CONFIG_FILE: &str = "config.json";

/// Generator settings applied on top of [`GenerationConfig::for_size`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_passengers: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_duration: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_duration: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_buf: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concourse_length: Option<u64>,
    /// Instances are picked as the hardest `1/factor` of a larger pool.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difficulty_pool_factor: Option<usize>,
}

impl GenerationOverrides {
    pub fn apply(&self, num_flights: usize, num_gates: usize) -> GenerationConfig {
        let mut c = GenerationConfig::for_size(num_flights, num_gates);
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(max_passengers, time_horizon, min_duration, max_duration, t_buf, concourse_length, difficulty_pool_factor);
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `(num_flights, num_gates)` pairs.
    pub sizes: Vec<(usize, usize)>,
    #[serde(default = "defaults::instances")]
    pub instances_per_size: usize,
    #[serde(default = "defaults::restarts")]
    pub restarts_per_instance: usize,
    #[serde(default = "defaults::xis")]
    pub xis: Vec<f64>,
    #[serde(default = "defaults::layers")]
    pub layer_counts: Vec<usize>,
    #[serde(default = "defaults::families")]
    pub families: Vec<String>,
    #[serde(default = "defaults::encodings")]
    pub encodings: Vec<String>,
    #[serde(default)]
    pub generation: GenerationOverrides,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "defaults::thresholds")]
    pub thresholds: Vec<f64>,
    /// `exact` or `sampled`.
    #[serde(default = "defaults::cost_mode")]
    pub cost_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(default = "defaults::evals_per_qubit")]
    pub evals_per_qubit: usize,
    #[serde(default = "defaults::max_qubits")]
    pub max_qubits: usize,
    /// Spacing of the normalized-iteration grid in curve reports.
    #[serde(default = "defaults::grid_step")]
    pub curve_grid_step: f64,
}

mod defaults {
    pub fn instances() -> usize {
        50
    }
    pub fn restarts() -> usize {
        5
    }
    pub fn xis() -> Vec<f64> {
        vec![0.01, 0.1, 0.25, 1.0]
    }
    pub fn layers() -> Vec<usize> {
        vec![1, 2, 3]
    }
    pub fn families() -> Vec<String> {
        vec!["entangling".into()]
    }
    pub fn encodings() -> Vec<String> {
        vec!["binary".into()]
    }
    pub fn thresholds() -> Vec<f64> {
        super::DEFAULT_THRESHOLDS.to_vec()
    }
    pub fn cost_mode() -> String {
        "exact".into()
    }
    pub fn evals_per_qubit() -> usize {
        50
    }
    pub fn max_qubits() -> usize {
        super::DEFAULT_MAX_QUBITS
    }
    pub fn grid_step() -> f64 {
        0.5
    }
}

impl SweepConfig {
    /// Defaults everywhere except the sizes.
    pub fn new(sizes: Vec<(usize, usize)>) -> Self {
        Self {
            sizes,
            instances_per_size: defaults::instances(),
            restarts_per_instance: defaults::restarts(),
            xis: defaults::xis(),
            layer_counts: defaults::layers(),
            families: defaults::families(),
            encodings: defaults::encodings(),
            generation: GenerationOverrides::default(),
            base_seed: 0,
            thresholds: defaults::thresholds(),
            cost_mode: defaults::cost_mode(),
            shots: None,
            evals_per_qubit: defaults::evals_per_qubit(),
            max_qubits: defaults::max_qubits(),
            curve_grid_step: defaults::grid_step(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let mut config: Self = serde_json::from_str(s)?;
        config.normalize()?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replaces strategy aliases by their canonical names.
    pub fn normalize(&mut self) -> Result<()> {
        for e in &mut self.encodings {
            *e = encoding(e)?.name().to_string();
        }
        for f in &mut self.families {
            *f = ansatz(f)?.name().to_string();
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.sizes.is_empty()
            || self.xis.is_empty()
            || self.layer_counts.is_empty()
            || self.families.is_empty()
            || self.encodings.is_empty()
            || self.thresholds.is_empty()
        {
            return bad("sizes, xis, layer_counts, families, encodings and thresholds must be nonempty".into());
        }
        if self.instances_per_size == 0 || self.restarts_per_instance == 0 || self.evals_per_qubit == 0 {
            return bad("instances_per_size, restarts_per_instance and evals_per_qubit must be positive".into());
        }
        for &xi in &self.xis {
            self.cost(xi).validate()?;
        }
        if self.layer_counts.contains(&0) {
            return bad("layer counts must be positive".into());
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return bad(format!("threshold {t} is outside (0, 1]"));
        }
        if !(self.curve_grid_step > 0.0) {
            return bad("curve_grid_step must be positive".into());
        }
        for f in &self.families {
            ansatz(f)?;
        }
        for &(nf, ng) in &self.sizes {
            self.generation.apply(nf, ng).validate()?;
            for e in &self.encodings {
                let n = encoding(e)?.num_qubits(nf, ng);
                if n > self.max_qubits {
                    return Err(Error::QubitCap {
                        qubits: n,
                        cap: self.max_qubits,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn cost(&self, xi: f64) -> CostSpec {
        CostSpec {
            xi,
            mode: self.cost_mode.clone(),
            shots: self.shots,
        }
    }

    /// Number of runs a complete sweep produces.
    pub fn run_count(&self) -> usize {
        self.sizes.len()
            * self.instances_per_size
            * self.encodings.len()
            * self.restarts_per_instance
            * self.xis.len()
            * self.layer_counts.len()
            * self.families.len()
    }

    /// Seed of instance `index` in the generator pool of a size.
    pub fn instance_seed(&self, num_flights: usize, num_gates: usize, index: usize) -> u64 {
        derive_seed(
            self.base_seed,
            &[tag("instance"), num_flights as u64, num_gates as u64, index as u64],
        )
    }

    pub fn run_seed(&self, key: &RunKey) -> u64 {
        derive_seed(
            self.base_seed,
            &[
                tag("run"),
                key.num_flights as u64,
                key.num_gates as u64,
                key.instance_id as u64,
                tag(&key.encoding),
                tag(&key.family),
                key.layers as u64,
                key.xi.to_bits(),
                key.restart as u64,
            ],
        )
    }

    /// The instances of one size, hardest first when a pool factor is set.
    pub fn instances(&self, num_flights: usize, num_gates: usize) -> Result<Vec<FlightGateInstance>> {
        let gen = self.generation.apply(num_flights, num_gates);
        let pool_size = self.instances_per_size * gen.difficulty_pool_factor;
        let pool = (0..pool_size)
            .map(|k| generate_instance(&gen, self.instance_seed(num_flights, num_gates, k)))
            .collect::<Result<Vec<_>>>()?;
        if gen.difficulty_pool_factor > 1 {
            difficulty_filter(&pool, self.instances_per_size)
        } else {
            Ok(pool)
        }
    }
}

/// Coordinates identifying one run within a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunKey {
    pub num_flights: usize,
    pub num_gates: usize,
    pub encoding: String,
    pub instance_id: usize,
    pub family: String,
    pub layers: usize,
    pub xi: f64,
    pub restart: usize,
}

impl RunKey {
    fn sort_key(&self) -> (usize, usize, &str, usize, &str, usize, u64, usize) {
        // xi > 0, so its bit pattern orders like the value
        (
            self.num_flights,
            self.num_gates,
            &self.encoding,
            self.instance_id,
            &self.family,
            self.layers,
            self.xi.to_bits(),
            self.restart,
        )
    }

    fn id(&self) -> (usize, usize, String, usize, String, usize, u64, usize) {
        let k = self.sort_key();
        (k.0, k.1, k.2.to_string(), k.3, k.4.to_string(), k.5, k.6, k.7)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub key: RunKey,
    pub n_qubits: usize,
    pub seed: u64,
    pub evals_used: usize,
    pub crossings: Vec<ThresholdCrossing>,
    pub final_fidelity: f64,
    pub best_cost: f64,
    pub optimal_time: f64,
    pub ground_degeneracy: usize,
    /// Set when the run failed; the numeric fields are then zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn first_eval(&self, threshold: f64) -> Option<usize> {
        self.crossings
            .iter()
            .find(|c| c.threshold == threshold)
            .and_then(|c| c.first_eval)
    }

    fn failed(key: RunKey, n_qubits: usize, seed: u64, thresholds: &[f64], err: &Error) -> Self {
        Self {
            key,
            n_qubits,
            seed,
            evals_used: 0,
            crossings: thresholds
                .iter()
                .map(|&threshold| ThresholdCrossing {
                    threshold,
                    first_eval: None,
                })
                .collect(),
            final_fidelity: 0.0,
            best_cost: 0.0,
            optimal_time: 0.0,
            ground_degeneracy: 0,
            error: Some(format!("{}: {err}", err.kind())),
        }
    }
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| a.key.sort_key().cmp(&b.key.sort_key()));
}

/// The per-instance data every run on that instance shares.
struct Prepared {
    table: EnergyTable,
    ground_states: Vec<u64>,
    optimal_time: f64,
}

fn prepare(inst: &FlightGateInstance, encoding_name: &str, max_qubits: usize) -> Result<Prepared> {
    let enc = encoding(encoding_name)?;
    let optimal_time = solve_exact(inst)?.optimal_time;
    let h = enc.hamiltonian(inst, default_penalties(inst));
    let table = diagonal_energies_capped(&h, max_qubits)?;
    let ground_states = ground_bitstrings(&table).states;
    Ok(Prepared {
        table,
        ground_states,
        optimal_time,
    })
}

fn run_one(config: &SweepConfig, prepared: &Prepared, key: RunKey) -> RunRecord {
    let n = prepared.table.num_qubits();
    let seed = config.run_seed(&key);
    let vqe = VqeConfig {
        max_evals: Some(config.evals_per_qubit * n),
        thresholds: config.thresholds.clone(),
        ..VqeConfig::new(key.layers, &key.family, config.cost(key.xi))
    };
    match run_vqe_capped(&prepared.table, &prepared.ground_states, &vqe, seed, config.max_qubits) {
        Ok(trace) => RunRecord {
            key,
            n_qubits: n,
            seed,
            evals_used: trace.total_evals,
            crossings: trace.crossings,
            final_fidelity: trace.final_fidelity,
            best_cost: trace.best_cost,
            optimal_time: prepared.optimal_time,
            ground_degeneracy: prepared.ground_states.len(),
            error: None,
        },
        Err(e) => RunRecord::failed(key, n, seed, &config.thresholds, &e),
    }
}

/// Runs the whole sweep in memory.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<RunRecord>> {
    let mut config = config.clone();
    config.normalize()?;
    sweep_inner(&config, None)
}

/// Runs the sweep with `out_dir` as its working directory.
///
/// Finished runs are appended to `records.jsonl` after each instance, and
/// runs already present there are not repeated, so an interrupted sweep
/// picks up where it stopped. At the end the file is rewritten in sorted
/// order. The directory must not hold records of a different config.
pub fn run_sweep_in(config: &SweepConfig, out_dir: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let dir = out_dir.as_ref();
    let mut config = config.clone();
    config.normalize()?;
    let config = &config;
    fs::create_dir_all(dir)?;
    let config_path = dir.join(CONFIG_FILE);
    if config_path.exists() {
        let existing = SweepConfig::load(&config_path)?;
        if existing != *config {
            return Err(Error::InvalidConfig(format!(
                "{} holds a sweep with a different config",
                dir.display()
            )));
        }
    } else {
        fs::write(&config_path, config.to_json_string() + "\n")?;
    }
    let records = sweep_inner(config, Some(dir))?;
    write_records(&dir.join(RECORDS_FILE), &records)?;
    Ok(records)
}

fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        for r in records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

/// Reads a records file, skipping a torn final line left by an interrupt.
pub fn read_records_file(path: &Path) -> Result<Vec<RunRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let lines: Vec<String> = BufReader::new(File::open(path)?).lines().collect::<std::io::Result<_>>()?;
    let mut records = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => records.push(r),
            Err(_) if i + 1 == lines.len() => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(records)
}

fn sweep_inner(config: &SweepConfig, dir: Option<&Path>) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let mut records = match dir {
        Some(d) => read_records_file(&d.join(RECORDS_FILE))?,
        None => Vec::new(),
    };
    let mut done: BTreeSet<_> = records.iter().map(|r| r.key.id()).collect();
    let mut sink = match dir {
        Some(d) => {
            // rewrite first so a torn tail never sits before new lines
            write_records(&d.join(RECORDS_FILE), &records)?;
            Some(BufWriter::new(
                OpenOptions::new().append(true).open(d.join(RECORDS_FILE))?,
            ))
        }
        None => None,
    };

    for &(nf, ng) in &config.sizes {
        let all_keys: Vec<RunKey> = keys_for_size(config, nf, ng);
        if all_keys.iter().all(|k| done.contains(&k.id())) {
            continue;
        }
        let instances = config.instances(nf, ng);
        for encoding_name in &config.encodings {
            let n_qubits = encoding(encoding_name)?.num_qubits(nf, ng);
            for id in 0..config.instances_per_size {
                let pending: Vec<RunKey> = all_keys
                    .iter()
                    .filter(|k| &k.encoding == encoding_name && k.instance_id == id)
                    .filter(|k| !done.contains(&k.id()))
                    .cloned()
                    .collect();
                if pending.is_empty() {
                    continue;
                }
                let prepared = match &instances {
                    Ok(list) => prepare(&list[id], encoding_name, config.max_qubits),
                    Err(e) => Err(Error::InvalidConfig(format!("instance generation failed: {e}"))),
                };
                let batch: Vec<RunRecord> = match &prepared {
                    Ok(p) => pending.into_par_iter().map(|k| run_one(config, p, k)).collect(),
                    Err(e) => pending
                        .into_iter()
                        .map(|k| {
                            let seed = config.run_seed(&k);
                            RunRecord::failed(k, n_qubits, seed, &config.thresholds, e)
                        })
                        .collect(),
                };
                if let Some(w) = sink.as_mut() {
                    for r in &batch {
                        serde_json::to_writer(&mut *w, r)?;
                        w.write_all(b"\n")?;
                    }
                    w.flush()?;
                }
                done.extend(batch.iter().map(|r| r.key.id()));
                records.extend(batch);
            }
        }
    }
    // keep only runs the config asks for, in canonical order
    let wanted: BTreeSet<_> = config
        .sizes
        .iter()
        .flat_map(|&(nf, ng)| keys_for_size(config, nf, ng))
        .map(|k| k.id())
        .collect();
    records.retain(|r| wanted.contains(&r.key.id()));
    sort_records(&mut records);
    records.dedup_by(|a, b| a.key.id() == b.key.id());
    Ok(records)
}

fn keys_for_size(config: &SweepConfig, num_flights: usize, num_gates: usize) -> Vec<RunKey> {
    let mut keys = Vec::with_capacity(config.run_count() / config.sizes.len());
    for encoding in &config.encodings {
        for instance_id in 0..config.instances_per_size {
            for family in &config.families {
                for &layers in &config.layer_counts {
                    for &xi in &config.xis {
                        for restart in 0..config.restarts_per_instance {
                            keys.push(RunKey {
                                num_flights,
                                num_gates,
                                encoding: encoding.clone(),
                                instance_id,
                                family: family.clone(),
                                layers,
                                xi,
                                restart,
                            });
                        }
                    }
                }
            }
        }
    }
    keys
}
