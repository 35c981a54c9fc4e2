use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fga_core::encoding::{default_penalties, diagonal_energies, encoding, ground_bitstrings, Penalties};
use fga_core::harness::{export_report, load_records, preset, run_sweep_in, SweepConfig};
use fga_core::instance::{
    feasible_ratio, generate_instance, one_hot_constraint_ratio, solve_exact, FlightGateInstance, GenerationConfig,
};
use fga_core::seed::derive_seed;
use fga_core::simulator::DEFAULT_MAX_QUBITS;
use fga_core::vqe::{run_vqe, CostSpec, VqeConfig};
use fga_core::{Error, Result};

/// Flight-gate assignment with a simulated CVaR-VQE.
#[derive(Parser)]
#[command(name = "fga", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances.
    Gen(GenArgs),
    /// Solve an instance by enumeration.
    Exact { instance: PathBuf },
    /// Emit the Pauli-Z Hamiltonian of an instance as JSON.
    Encode(EncodeArgs),
    /// Run one VQE optimization.
    Vqe(VqeArgs),
    /// Run a parameter sweep and write its report.
    Sweep(SweepArgs),
    /// Rebuild the report of a sweep directory.
    Report {
        records_dir: PathBuf,
        /// Defaults to the records directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fraction of basis states that are feasible under each encoding.
    Ratio { instance: PathBuf },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    flights: usize,
    #[arg(long)]
    gates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Generator parameters as JSON; `--flights`/`--gates` still apply.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for `instance_<k>.json`; without it instances go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    instance: PathBuf,
    #[arg(long, default_value = "binary")]
    encoding: String,
    /// Penalty weight for both constraints; defaults to one plus the
    /// travel-time upper bound.
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VqeArgs {
    instance: PathBuf,
    #[arg(long, default_value = "binary")]
    encoding: String,
    #[arg(long, default_value_t = 0.1)]
    xi: f64,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, default_value = "entangling")]
    family: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to 50 per qubit.
    #[arg(long)]
    max_evals: Option<usize>,
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long)]
    shots: Option<usize>,
    /// Directory for `trace.csv` and `summary.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config JSON; omit when using `--preset`.
    config: Option<PathBuf>,
    /// One of `main`, `onehot`, `g4`.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Qubit cap for presets.
    #[arg(long, default_value_t = 18)]
    max_qubits: usize,
    /// Working directory; reruns resume from its `records.jsonl`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": message.trim() }));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    print_text(&serde_json::to_string_pretty(value)?)
}

/// Writes to stdout; a reader that went away early is not an error.
fn print_text(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Exact { instance } => {
            let inst = FlightGateInstance::load(instance)?;
            print_json(&solve_exact(&inst)?)
        }
        Command::Encode(args) => encode(args),
        Command::Vqe(args) => vqe(args),
        Command::Sweep(args) => sweep(args),
        Command::Report { records_dir, out } => {
            let (records, config) = load_records(&records_dir)?;
            let out = out.unwrap_or(records_dir);
            let files = export_report(&records, config.as_ref(), &out)?;
            print_json(&json!({ "runs": records.len(), "files": files }))
        }
        Command::Ratio { instance } => {
            let inst = FlightGateInstance::load(instance)?;
            print_json(&json!({
                "binary": feasible_ratio(&inst, encoding("binary")?.as_ref())?,
                "one_hot": feasible_ratio(&inst, encoding("one_hot")?.as_ref())?,
                "one_hot_constraint_only": one_hot_constraint_ratio(inst.num_flights, inst.num_gates),
            }))
        }
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => {
            let mut c: GenerationConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
            c.num_flights = args.flights;
            c.num_gates = args.gates;
            c
        }
        None => GenerationConfig::for_size(args.flights, args.gates),
    };
    let seed_of = |k: usize| if args.count == 1 { args.seed } else { derive_seed(args.seed, &[k as u64]) };
    let instances = (0..args.count)
        .map(|k| generate_instance(&config, seed_of(k)))
        .collect::<Result<Vec<_>>>()?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (k, inst) in instances.iter().enumerate() {
                fs::write(dir.join(format!("instance_{k}.json")), inst.to_json_string() + "\n")?;
            }
            Ok(())
        }
        None if instances.len() == 1 => {
            print_text(&instances[0].to_json_string())
        }
        None => print_json(&instances),
    }
}

fn encode(args: EncodeArgs) -> Result<()> {
    let inst = FlightGateInstance::load(&args.instance)?;
    let penalties = match args.penalty {
        Some(p) if p.is_finite() && p > 0.0 => Penalties { one: p, not: p },
        Some(p) => return Err(Error::InvalidArgument(format!("penalty {p} must be positive"))),
        None => default_penalties(&inst),
    };
    let h = encoding(&args.encoding)?.hamiltonian(&inst, penalties);
    write_or_print(args.out.as_deref(), &h.to_json_string())
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, format!("{text}\n"))?),
        None => print_text(text),
    }
}

fn vqe(args: VqeArgs) -> Result<()> {
    let inst = FlightGateInstance::load(&args.instance)?;
    let enc = encoding(&args.encoding)?;
    let n = enc.num_qubits(inst.num_flights, inst.num_gates);
    if n > DEFAULT_MAX_QUBITS {
        return Err(Error::QubitCap {
            qubits: n,
            cap: DEFAULT_MAX_QUBITS,
        });
    }
    let table = diagonal_energies(&enc.hamiltonian(&inst, default_penalties(&inst)))?;
    let ground = ground_bitstrings(&table);
    let cost = CostSpec {
        xi: args.xi,
        mode: args.mode,
        shots: args.shots,
    };
    let config = VqeConfig {
        max_evals: args.max_evals,
        ..VqeConfig::new(args.layers, &args.family, cost)
    };
    let trace = run_vqe(&table, &ground.states, &config, args.seed)?;
    if let Some(dir) = &args.out {
        trace.export(dir)?;
    }
    print_json(&json!({
        "encoding": enc.name(),
        "n_qubits": n,
        "ground_energy": ground.energy,
        "ground_degeneracy": ground.states.len(),
        "summary": trace.summary(),
    }))
}

fn sweep(args: SweepArgs) -> Result<()> {
    let config = match (&args.config, &args.preset) {
        (Some(path), None) => SweepConfig::load(path)?,
        (None, Some(name)) => preset(name, args.max_qubits)?,
        _ => return Err(Error::InvalidArgument("give a config file or --preset".into())),
    };
    let records = run_sweep_in(&config, &args.out)?;
    let files = export_report(&records, Some(&config), &args.out)?;
    print_json(&json!({
        "runs": records.len(),
        "failed_runs": records.iter().filter(|r| r.error.is_some()).count(),
        "files": files,
    }))
}
