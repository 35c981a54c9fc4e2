//! Aggregation of run records into success fractions, N̄ tables and CSV
//! files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{read_records_file, sort_records, RunRecord, SweepConfig, CONFIG_FILE, RECORDS_FILE};
use crate::error::{Error, Result};

/// `0, step, 2·step, …` up to `max` inclusive.
pub fn curve_grid(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

/// For each grid value `g`, the fraction of runs whose first crossing of
/// `threshold` happened within `g · n_qubits` evaluations.
pub fn fraction_reaching<'a>(
    records: impl IntoIterator<Item = &'a RunRecord>,
    threshold: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let normalized: Vec<Option<f64>> = records
        .into_iter()
        .map(|r| r.first_eval(threshold).map(|e| e as f64 / r.n_qubits as f64))
        .collect();
    if normalized.is_empty() {
        return Err(Error::Empty("record group"));
    }
    let total = normalized.len() as f64;
    Ok(grid
        .iter()
        .map(|&g| {
            // tolerance keeps e / n == g on the grid point itself
            let hits = normalized.iter().flatten().filter(|&&x| x <= g + 1e-9).count();
            hits as f64 / total
        })
        .collect())
}

/// Mean evaluations to the first crossing over the runs that crossed.
pub fn average_evals_to_threshold<'a>(records: impl IntoIterator<Item = &'a RunRecord>, threshold: f64) -> Option<f64> {
    let hits: Vec<usize> = records.into_iter().filter_map(|r| r.first_eval(threshold)).collect();
    (!hits.is_empty()).then(|| hits.iter().sum::<usize>() as f64 / hits.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdStats {
    pub threshold: f64,
    pub successes: usize,
    pub fraction: f64,
    /// Absent when no run crossed.
    pub n_bar: Option<f64>,
}

fn stats(group: &[&RunRecord], thresholds: &[f64]) -> Vec<ThresholdStats> {
    thresholds
        .iter()
        .map(|&threshold| {
            let successes = group.iter().filter(|r| r.first_eval(threshold).is_some()).count();
            ThresholdStats {
                threshold,
                successes,
                fraction: successes as f64 / group.len() as f64,
                n_bar: average_evals_to_threshold(group.iter().copied(), threshold),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub num_flights: usize,
    pub num_gates: usize,
    pub encoding: String,
    pub n_qubits: usize,
    pub family: String,
    pub layers: usize,
    pub xi: f64,
    pub runs: usize,
    pub failed_runs: usize,
    pub stats: Vec<ThresholdStats>,
}

impl SummaryRow {
    pub fn fraction(&self, threshold: f64) -> Option<f64> {
        self.stats.iter().find(|s| s.threshold == threshold).map(|s| s.fraction)
    }

    pub fn n_bar(&self, threshold: f64) -> Option<f64> {
        self.stats.iter().find(|s| s.threshold == threshold).and_then(|s| s.n_bar)
    }
}

type GroupKey = (usize, usize, String, String, usize, u64);

fn group_key(r: &RunRecord) -> GroupKey {
    let k = &r.key;
    (k.num_flights, k.num_gates, k.encoding.clone(), k.family.clone(), k.layers, k.xi.to_bits())
}

fn groups(records: &[RunRecord]) -> BTreeMap<GroupKey, Vec<&RunRecord>> {
    let mut map: BTreeMap<GroupKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        map.entry(group_key(r)).or_default().push(r);
    }
    map
}

/// One row per (size, encoding, family, layers, ξ); all restarts of all
/// instances are pooled, and failed runs count as unsuccessful.
pub fn summarize(records: &[RunRecord], thresholds: &[f64]) -> Vec<SummaryRow> {
    groups(records)
        .into_values()
        .map(|group| {
            let first = group[0];
            SummaryRow {
                num_flights: first.key.num_flights,
                num_gates: first.key.num_gates,
                encoding: first.key.encoding.clone(),
                n_qubits: first.n_qubits,
                family: first.key.family.clone(),
                layers: first.key.layers,
                xi: first.key.xi,
                runs: group.len(),
                failed_runs: group.iter().filter(|r| r.error.is_some()).count(),
                stats: stats(&group, thresholds),
            }
        })
        .collect()
}

/// N̄ against qubit count, sizes with equal qubit counts pooled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub encoding: String,
    pub family: String,
    pub layers: usize,
    pub xi: f64,
    pub n_qubits: usize,
    pub threshold: f64,
    pub runs: usize,
    pub successes: usize,
    pub n_bar: Option<f64>,
}

pub fn scaling_rows(records: &[RunRecord], thresholds: &[f64]) -> Vec<ScalingRow> {
    let mut map: BTreeMap<(String, String, usize, u64, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let k = &r.key;
        map.entry((k.encoding.clone(), k.family.clone(), k.layers, k.xi.to_bits(), r.n_qubits))
            .or_default()
            .push(r);
    }
    let mut rows = Vec::new();
    for ((encoding, family, layers, xi_bits, n_qubits), group) in map {
        for s in stats(&group, thresholds) {
            rows.push(ScalingRow {
                encoding: encoding.clone(),
                family: family.clone(),
                layers,
                xi: f64::from_bits(xi_bits),
                n_qubits,
                threshold: s.threshold,
                runs: group.len(),
                successes: s.successes,
                n_bar: s.n_bar,
            });
        }
    }
    rows
}

/// Success-fraction curves of one figure panel: a size, encoding, family,
/// layer count and threshold, one curve per ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePanel {
    pub num_flights: usize,
    pub num_gates: usize,
    pub encoding: String,
    pub family: String,
    pub layers: usize,
    pub threshold: f64,
    pub xis: Vec<f64>,
    pub grid: Vec<f64>,
    /// `fractions[i]` is the curve for `xis[i]`.
    pub fractions: Vec<Vec<f64>>,
}

impl CurvePanel {
    pub fn file_name(&self) -> String {
        format!(
            "{}_{}_l{}_f{}g{}_t{}.csv",
            self.encoding, self.family, self.layers, self.num_flights, self.num_gates, self.threshold
        )
    }
}

pub fn curve_panels(records: &[RunRecord], thresholds: &[f64], grid: &[f64]) -> Result<Vec<CurvePanel>> {
    let mut panels: BTreeMap<(usize, usize, String, String, usize), BTreeMap<u64, Vec<&RunRecord>>> = BTreeMap::new();
    for ((nf, ng, enc, fam, l, xi_bits), group) in groups(records) {
        panels.entry((nf, ng, enc, fam, l)).or_default().insert(xi_bits, group);
    }
    let mut out = Vec::new();
    for ((num_flights, num_gates, encoding, family, layers), by_xi) in panels {
        for &threshold in thresholds {
            let mut xis = Vec::new();
            let mut fractions = Vec::new();
            for (xi_bits, group) in &by_xi {
                xis.push(f64::from_bits(*xi_bits));
                fractions.push(fraction_reaching(group.iter().copied(), threshold, grid)?);
            }
            out.push(CurvePanel {
                num_flights,
                num_gates,
                encoding: encoding.clone(),
                family: family.clone(),
                layers,
                threshold,
                xis,
                grid: grid.to_vec(),
                fractions,
            });
        }
    }
    Ok(out)
}

/// SHA-256 of the config's canonical JSON, in hex.
pub fn config_hash(config: &SweepConfig) -> String {
    hex(&Sha256::digest(config.to_json_string().as_bytes()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeEntry {
    pub num_flights: usize,
    pub num_gates: usize,
    /// Generator seeds of the instance pool, in pool order.
    pub instance_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    pub sizes: Vec<SizeEntry>,
    pub run_count: usize,
    pub failed_runs: usize,
    /// SHA-256 of the sorted records as JSON lines.
    pub records_hash: String,
    pub files: Vec<String>,
}

/// Reads `records.jsonl` and, if present, `config.json` from a sweep
/// directory.
pub fn load_records(dir: impl AsRef<Path>) -> Result<(Vec<RunRecord>, Option<SweepConfig>)> {
    let dir = dir.as_ref();
    let path = dir.join(RECORDS_FILE);
    if !path.exists() {
        return Err(Error::InvalidArgument(format!("no {RECORDS_FILE} in {}", dir.display())));
    }
    let mut records = read_records_file(&path)?;
    sort_records(&mut records);
    let config_path = dir.join(CONFIG_FILE);
    let config = if config_path.exists() {
        Some(SweepConfig::load(config_path)?)
    } else {
        None
    };
    Ok((records, config))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Writes `runs.csv`, `summary.csv`, `scaling.csv`, `xi_comparison.csv`,
/// `curves/*.csv` and `manifest.json` into `out_dir` and returns the paths
/// written. Output depends only on the record set and the config, so
/// re-exporting gives identical bytes.
pub fn export_report(records: &[RunRecord], config: Option<&SweepConfig>, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    let mut records = records.to_vec();
    sort_records(&mut records);
    let thresholds: Vec<f64> = match config {
        Some(c) => c.thresholds.clone(),
        None => {
            let set: BTreeSet<u64> = records
                .iter()
                .flat_map(|r| r.crossings.iter().map(|c| c.threshold.to_bits()))
                .collect();
            set.into_iter().map(f64::from_bits).collect()
        }
    };
    let grid = match config {
        Some(c) => curve_grid(c.curve_grid_step, c.evals_per_qubit as f64),
        None => curve_grid(0.5, 50.0),
    };
    let curves_dir = dir.join("curves");
    if curves_dir.exists() {
        fs::remove_dir_all(&curves_dir)?;
    }
    fs::create_dir_all(&curves_dir)?;
    let mut written = Vec::new();

    let mut header = strings(&[
        "num_flights", "num_gates", "encoding", "n_qubits", "family", "layers", "xi", "instance_id", "restart",
        "seed", "evals_used",
    ]);
    header.extend(thresholds.iter().map(|t| format!("first_eval_{t}")));
    header.extend(strings(&["final_fidelity", "best_cost", "optimal_time", "ground_degeneracy", "error"]));
    let path = dir.join("runs.csv");
    write_csv(
        &path,
        &header,
        records.iter().map(|r| {
            let k = &r.key;
            let mut row = vec![
                k.num_flights.to_string(),
                k.num_gates.to_string(),
                k.encoding.clone(),
                r.n_qubits.to_string(),
                k.family.clone(),
                k.layers.to_string(),
                k.xi.to_string(),
                k.instance_id.to_string(),
                k.restart.to_string(),
                r.seed.to_string(),
                r.evals_used.to_string(),
            ];
            row.extend(thresholds.iter().map(|&t| r.first_eval(t).map(|e| e.to_string()).unwrap_or_default()));
            row.extend([
                r.final_fidelity.to_string(),
                r.best_cost.to_string(),
                r.optimal_time.to_string(),
                r.ground_degeneracy.to_string(),
                r.error.clone().unwrap_or_default(),
            ]);
            row
        }),
    )?;
    written.push(path);

    let summary = summarize(&records, &thresholds);
    let mut header = strings(&[
        "num_flights", "num_gates", "encoding", "n_qubits", "family", "layers", "xi", "runs", "failed_runs",
    ]);
    for t in &thresholds {
        header.extend([format!("successes_{t}"), format!("fraction_{t}"), format!("n_bar_{t}")]);
    }
    let path = dir.join("summary.csv");
    write_csv(
        &path,
        &header,
        summary.iter().map(|s| {
            let mut row = vec![
                s.num_flights.to_string(),
                s.num_gates.to_string(),
                s.encoding.clone(),
                s.n_qubits.to_string(),
                s.family.clone(),
                s.layers.to_string(),
                s.xi.to_string(),
                s.runs.to_string(),
                s.failed_runs.to_string(),
            ];
            for st in &s.stats {
                row.extend([st.successes.to_string(), st.fraction.to_string(), opt(st.n_bar)]);
            }
            row
        }),
    )?;
    written.push(path);

    let path = dir.join("scaling.csv");
    write_csv(
        &path,
        &strings(&["encoding", "family", "layers", "xi", "n_qubits", "threshold", "runs", "successes", "n_bar"]),
        scaling_rows(&records, &thresholds).into_iter().map(|s| {
            vec![
                s.encoding,
                s.family,
                s.layers.to_string(),
                s.xi.to_string(),
                s.n_qubits.to_string(),
                s.threshold.to_string(),
                s.runs.to_string(),
                s.successes.to_string(),
                opt(s.n_bar),
            ]
        }),
    )?;
    written.push(path);

    let path = dir.join("xi_comparison.csv");
    write_csv(
        &path,
        &strings(&[
            "num_flights", "num_gates", "encoding", "family", "layers", "threshold", "fraction_xi_0.1",
            "fraction_xi_1", "difference",
        ]),
        xi_comparison(&summary, &thresholds),
    )?;
    written.push(path);

    for panel in curve_panels(&records, &thresholds, &grid)? {
        let path = curves_dir.join(panel.file_name());
        let mut header = vec!["normalized_iterations".to_string()];
        header.extend(panel.xis.iter().map(|x| format!("xi_{x}")));
        write_csv(
            &path,
            &header,
            panel.grid.iter().enumerate().map(|(i, g)| {
                let mut row = vec![g.to_string()];
                row.extend(panel.fractions.iter().map(|f| f[i].to_string()));
                row
            }),
        )?;
        written.push(path);
    }

    let manifest = Manifest {
        config: config.cloned(),
        config_hash: config.map(config_hash),
        base_seed: config.map(|c| c.base_seed),
        sizes: config.map(size_entries).unwrap_or_default(),
        run_count: records.len(),
        failed_runs: records.iter().filter(|r| r.error.is_some()).count(),
        records_hash: records_hash(&records)?,
        files: written
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).to_string_lossy().replace('\\', "/"))
            .collect(),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}

fn size_entries(config: &SweepConfig) -> Vec<SizeEntry> {
    config
        .sizes
        .iter()
        .map(|&(nf, ng)| {
            let pool = config.instances_per_size * config.generation.apply(nf, ng).difficulty_pool_factor;
            SizeEntry {
                num_flights: nf,
                num_gates: ng,
                instance_seeds: (0..pool).map(|k| config.instance_seed(nf, ng, k)).collect(),
            }
        })
        .collect()
}

fn records_hash(records: &[RunRecord]) -> Result<String> {
    let mut h = Sha256::new();
    for r in records {
        h.update(serde_json::to_vec(r)?);
        h.update(b"\n");
    }
    Ok(hex(&h.finalize()))
}

/// Success fractions at ξ = 0.1 and ξ = 1 side by side, for every group
/// that ran both.
fn xi_comparison(summary: &[SummaryRow], thresholds: &[f64]) -> Vec<Vec<String>> {
    let mut by_key: BTreeMap<(usize, usize, &str, &str, usize), (Option<&SummaryRow>, Option<&SummaryRow>)> =
        BTreeMap::new();
    for s in summary {
        let entry = by_key
            .entry((s.num_flights, s.num_gates, &s.encoding, &s.family, s.layers))
            .or_default();
        if s.xi == 0.1 {
            entry.0 = Some(s);
        } else if s.xi == 1.0 {
            entry.1 = Some(s);
        }
    }
    let mut rows = Vec::new();
    for ((nf, ng, enc, fam, l), pair) in by_key {
        let (Some(cvar), Some(mean)) = pair else { continue };
        for &t in thresholds {
            let (a, b) = (cvar.fraction(t).unwrap_or(0.0), mean.fraction(t).unwrap_or(0.0));
            rows.push(vec![
                nf.to_string(),
                ng.to_string(),
                enc.to_string(),
                fam.to_string(),
                l.to_string(),
                t.to_string(),
                a.to_string(),
                b.to_string(),
                (a - b).to_string(),
            ]);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RunKey;
    use crate::vqe::ThresholdCrossing;

    fn record(xi: f64, n_qubits: usize, hits: [Option<usize>; 2]) -> RunRecord {
        RunRecord {
            key: RunKey {
                num_flights: 2,
                num_gates: 2,
                encoding: "binary".into(),
                instance_id: 0,
                family: "entangling".into(),
                layers: 1,
                xi,
                restart: 0,
            },
            n_qubits,
            seed: 0,
            evals_used: 10,
            crossings: vec![
                ThresholdCrossing { threshold: 0.01, first_eval: hits[0] },
                ThresholdCrossing { threshold: 0.1, first_eval: hits[1] },
            ],
            final_fidelity: 0.5,
            best_cost: 1.0,
            optimal_time: 1.0,
            ground_degeneracy: 1,
            error: None,
        }
    }

    #[test]
    fn n_bar_examples() {
        let rs = [record(0.1, 2, [Some(10), Some(10)]), record(0.1, 2, [Some(30), None])];
        assert_eq!(average_evals_to_threshold(&rs[..1], 0.01), Some(10.0));
        assert_eq!(average_evals_to_threshold(&rs, 0.01), Some(20.0));
        assert_eq!(average_evals_to_threshold(&rs, 0.1), Some(10.0));
        assert_eq!(average_evals_to_threshold(&rs[1..], 0.1), None);
    }

    #[test]
    fn fraction_examples() {
        let rs = [
            record(0.1, 2, [Some(2), Some(4)]),
            record(0.1, 2, [Some(6), None]),
            record(0.1, 2, [None, None]),
            record(0.1, 2, [Some(1), Some(1)]),
        ];
        let grid = curve_grid(0.5, 4.0);
        assert_eq!(grid.len(), 9);
        let low = fraction_reaching(&rs, 0.01, &grid).unwrap();
        let high = fraction_reaching(&rs, 0.1, &grid).unwrap();
        assert_eq!(low[0], 0.0);
        assert_eq!(low[2], 0.5);
        assert_eq!(*low.last().unwrap(), 0.75);
        assert_eq!(high[2], 0.25);
        assert_eq!(high[4], 0.5);
        assert!(low.iter().zip(&high).all(|(a, b)| a >= b));
        assert!(fraction_reaching(&[], 0.1, &grid).is_err());
    }

    #[test]
    fn summary_marks_absent_n_bar() {
        let rs = [record(1.0, 2, [Some(4), None]), record(0.1, 2, [Some(2), Some(3)])];
        let rows = summarize(&rs, &[0.01, 0.1]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].xi, 0.1);
        assert_eq!(rows[1].n_bar(0.1), None);
        assert_eq!(rows[1].fraction(0.01), Some(1.0));
    }

    #[test]
    fn empty_export_writes_headers() {
        let dir = tempfile::tempdir().unwrap();
        export_report(&[], None, dir.path()).unwrap();
        let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert_eq!(runs.lines().count(), 1);
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(summary.starts_with("num_flights,num_gates,encoding"));
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn curve_files_match_fractions() {
        let dir = tempfile::tempdir().unwrap();
        let rs = vec![record(0.1, 2, [Some(2), Some(4)]), record(1.0, 2, [Some(6), None])];
        export_report(&rs, None, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("curves/binary_entangling_l1_f2g2_t0.01.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "normalized_iterations,xi_0.1,xi_1");
        let grid = curve_grid(0.5, 50.0);
        let a = fraction_reaching(&rs[..1], 0.01, &grid).unwrap();
        let b = fraction_reaching(&rs[1..], 0.01, &grid).unwrap();
        for (i, line) in lines.enumerate() {
            let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cells, vec![grid[i], a[i], b[i]]);
        }
    }
}
