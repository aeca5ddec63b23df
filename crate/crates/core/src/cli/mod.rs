// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! `laymat` command-line driver.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 parse or schema error,
//! 3 no embedding found.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::calibration::{error_map, synth_calibration, Profile};
use crate::circuit::{parse_circuit_auto, serialize_circuit, CircuitFormat, GateRegistry, QuantumCircuit};
use crate::gen::random_routed_circuit;
use crate::interaction::{build_interaction_graph, MatchMode};
use crate::noise::{simulate_fidelity, NoiseModel};
use crate::scoring::{CostKind, ScoredLayout, DEFAULT_TIE_TOL};
use crate::selector::{
    best_layout, load_device, rank_on_device, remap, select_device, DeviceCandidate, SelectOptions, SelectorError,
};
use crate::subiso::{find_embeddings, NodeOrdering, SearchBudget};
use crate::topology::{heavy_hex, line, load_coupling_map};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NO_EMBEDDING: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "laymat", version, about = "Pick low-error qubit layouts for routed circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List every layout of the circuit on a device, best first.
    FindLayouts {
        #[command(flatten)]
        run: RunConfig,
        #[arg(long)]
        device: PathBuf,
    },
    /// Rewrite the circuit onto the best layout of a device.
    Remap {
        #[command(flatten)]
        run: RunConfig,
        #[arg(long)]
        device: PathBuf,
        /// Output circuit; `.json` selects JSON, anything else QASM.
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Pick the best device and layout across a fleet.
    SelectDevice {
        #[command(flatten)]
        run: RunConfig,
        #[arg(long = "device", required = true, num_args = 1..)]
        devices: Vec<PathBuf>,
    },
    /// Time the embedding search for random circuits on a heavy-hex map; CSV on stdout.
    Bench {
        /// Comma-separated circuit widths.
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 15])]
        widths: Vec<usize>,
        /// Heavy-hex parameter of the target (23 gives 1299 qubits).
        #[arg(long, default_value_t = 23)]
        distance: usize,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        /// Timed runs per (width, ordering).
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = MatchMode::Loose, value_enum)]
        mode: MatchMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the interaction graph of a circuit.
    Graph {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, default_value_t = MatchMode::Loose, value_enum)]
        mode: MatchMode,
        #[arg(long)]
        gates: Option<PathBuf>,
    },
    /// Compare layout scores against simulated fidelity.
    Validate {
        #[command(flatten)]
        run: RunConfig,
        #[arg(long)]
        device: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        /// Only simulate the best N layouts.
        #[arg(long)]
        top: Option<usize>,
    },
    /// Write a device file with a synthetic calibration.
    SynthDevice {
        /// `heavy-hex:D`, `line:N`, or a coupling-map JSON path.
        #[arg(long)]
        topology: String,
        #[arg(long, value_enum, default_value_t = Profile::Uniform)]
        profile: Profile,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
}

/// Options shared by the commands that search and score.
#[derive(Debug, Args)]
pub struct RunConfig {
    /// Routed circuit, QASM subset or circuit JSON.
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long, value_enum, default_value_t = MatchMode::Loose)]
    pub mode: MatchMode,
    #[arg(long, value_enum, default_value_t = CostKind::Default)]
    pub cost: CostKind,
    #[arg(long, value_enum, default_value_t = NodeOrdering::Vf2pp)]
    pub ordering: NodeOrdering,
    /// Stop the search after this many state visits.
    #[arg(long)]
    pub max_visits: Option<std::num::NonZeroU64>,
    /// Stop the search after this many layouts.
    #[arg(long)]
    pub max_layouts: Option<std::num::NonZeroU64>,
    /// Scores closer than this count as tied.
    #[arg(long, default_value_t = DEFAULT_TIE_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Extra gate definitions: `{"name": {"arity": n, "params": k}}`.
    #[arg(long)]
    pub gates: Option<PathBuf>,
}

impl RunConfig {
    fn options(&self) -> SelectOptions {
        SelectOptions {
            mode: self.mode,
            ordering: self.ordering,
            budget: SearchBudget {
                max_state_visits: self.max_visits,
                max_layouts: self.max_layouts,
            },
            tol: self.tol,
        }
    }
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn parse(message: impl ToString) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: message.to_string(),
        }
    }

    fn failure(message: impl ToString) -> Self {
        CliError {
            code: EXIT_FAILURE,
            message: message.to_string(),
        }
    }
}

impl From<SelectorError> for CliError {
    fn from(e: SelectorError) -> Self {
        let code = match &e {
            SelectorError::Json(_) | SelectorError::Topology(_) | SelectorError::Calibration(_) => EXIT_PARSE,
            SelectorError::NoEmbeddings { .. } | SelectorError::AllSkipped(_) => EXIT_NO_EMBEDDING,
            _ => EXIT_FAILURE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::failure(format!("{}: {e}", path.display())))
}

fn registry(gates: Option<&Path>) -> Result<GateRegistry, CliError> {
    let mut reg = GateRegistry::default();
    if let Some(path) = gates {
        reg.extend_from_json(&read(path)?)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    }
    Ok(reg)
}

fn load_circuit(path: &Path, gates: Option<&Path>) -> Result<QuantumCircuit, CliError> {
    parse_circuit_auto(&read(path)?, &registry(gates)?).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn load_device_file(path: &Path) -> Result<DeviceCandidate, CliError> {
    load_device(&read(path)?).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn scored_json(rank: usize, s: &ScoredLayout) -> Value {
    json!({
        "rank": rank,
        "layout": s.layout,
        "score": s.score,
        "fidelity_estimate": s.fidelity_estimate,
        "tied_with": s.tied_with,
    })
}

fn emit(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    writeln!(out, "{text}").map_err(CliError::failure)
}

fn table(rows: &[ScoredLayout]) -> String {
    let mut s = String::from("rank  score         tied  layout\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(s, "{:<5} {:<13.6e} {:<5} {}", i, r.score, r.tied_with, r.layout);
    }
    s
}

fn settings(run: &RunConfig) -> Value {
    json!({
        "mode": run.mode,
        "cost": run.cost,
        "ordering": run.ordering,
        "max_visits": run.max_visits,
        "max_layouts": run.max_layouts,
        "tol": run.tol,
        "seed": run.seed,
    })
}

fn find_layouts(run: &RunConfig, device: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let c = load_circuit(&run.circuit, run.gates.as_deref())?;
    let d = load_device_file(device)?;
    let ranking = rank_on_device(&c, &d, &run.cost, &run.options())?;
    if ranking.ranked.is_empty() {
        return Err(SelectorError::NoEmbeddings {
            device: d.name,
            exhausted: ranking.exhausted,
        }
        .into());
    }
    match run.format {
        OutputFormat::Table => write!(out, "{}", table(&ranking.ranked)).map_err(CliError::failure),
        OutputFormat::Json => emit(
            out,
            &json!({
                "schema": "laymat/find-layouts/v1",
                "device": d.name,
                "settings": settings(run),
                "exhausted": ranking.exhausted,
                "visits_used": ranking.visits_used,
                "num_layouts": ranking.ranked.len(),
                "layouts": ranking.ranked.iter().enumerate().map(|(i, s)| scored_json(i, s)).collect::<Vec<_>>(),
            }),
        ),
    }
}

fn remap_cmd(run: &RunConfig, device: &Path, output: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let c = load_circuit(&run.circuit, run.gates.as_deref())?;
    let d = load_device_file(device)?;
    let best = best_layout(&c, &d, &run.cost, &run.options())?;
    let remapped = remap(&c, &best.layout, d.coupling_map.num_qubits())?;
    let format = match output.extension().and_then(|e| e.to_str()) {
        Some("json") => CircuitFormat::Json,
        _ => CircuitFormat::Qasm,
    };
    std::fs::write(output, serialize_circuit(&remapped, format))
        .map_err(|e| CliError::failure(format!("{}: {e}", output.display())))?;
    match run.format {
        OutputFormat::Table => writeln!(out, "device {}  score {:.6e}  layout {}", d.name, best.score, best.layout)
            .map_err(CliError::failure),
        OutputFormat::Json => emit(
            out,
            &json!({
                "schema": "laymat/remap/v1",
                "device": d.name,
                "settings": settings(run),
                "layout": best.layout,
                "score": best.score,
                "fidelity_estimate": best.fidelity_estimate,
                "tied_with": best.tied_with,
                "output": output.display().to_string(),
            }),
        ),
    }
}

fn select_cmd(run: &RunConfig, devices: &[PathBuf], out: &mut dyn Write) -> Result<(), CliError> {
    let c = load_circuit(&run.circuit, run.gates.as_deref())?;
    let fleet = devices.iter().map(|p| load_device_file(p)).collect::<Result<Vec<_>, _>>()?;
    let report = select_device(&c, &fleet, &run.cost, &run.options())?;
    match run.format {
        OutputFormat::Table => {
            let mut s = String::from("device                score         layout / reason\n");
            for d in &report.devices {
                match (&d.best, &d.skip_reason) {
                    (Some(b), _) => writeln!(s, "{:<21} {:<13.6e} {}", d.device, b.score, b.layout),
                    (None, reason) => writeln!(s, "{:<21} {:<13} {}", d.device, "-", reason.as_deref().unwrap_or("")),
                }
                .expect("writing to a String cannot fail");
            }
            let w = report.winner.as_ref().expect("select_device returns a winner");
            let _ = writeln!(s, "winner: {}", w.device);
            write!(out, "{s}").map_err(CliError::failure)
        }
        OutputFormat::Json => {
            let mut value = serde_json::to_value(&report).expect("report serializes");
            value["schema"] = json!("laymat/select-device/v1");
            value["settings"] = settings(run);
            emit(out, &value)
        }
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

#[allow(clippy::too_many_arguments)]
fn bench(
    widths: &[usize],
    distance: usize,
    depth: usize,
    runs: usize,
    mode: MatchMode,
    seed: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let cm = heavy_hex(distance).map_err(CliError::parse)?;
    let runs = runs.max(1);
    writeln!(out, "width,ordering,target_qubits,pattern_edges,layouts,visits,exhausted,median_ms,min_ms,max_ms")
        .map_err(CliError::failure)?;
    for &width in widths {
        let routed = random_routed_circuit(&cm, width, depth, seed ^ width as u64)
            .ok_or_else(|| CliError::failure(format!("no connected {width}-qubit region in the target")))?;
        let g = build_interaction_graph(&routed.circuit, mode);
        let mut medians = Vec::new();
        for ordering in [NodeOrdering::Vf2, NodeOrdering::Vf2pp] {
            let mut times = Vec::with_capacity(runs);
            let mut last = None;
            for _ in 0..runs {
                let t = Instant::now();
                let r = find_embeddings(&g, &cm, mode, ordering, SearchBudget::unlimited());
                times.push(t.elapsed().as_secs_f64() * 1e3);
                last = Some(r);
            }
            let r = last.expect("at least one run");
            let med = median(&mut times);
            medians.push(med);
            let ord = serde_json::to_value(ordering).expect("ordering serializes");
            writeln!(
                out,
                "{width},{},{},{},{},{},{},{med:.3},{:.3},{:.3}",
                ord.as_str().unwrap_or_default(),
                cm.num_qubits(),
                g.num_edges(),
                r.layouts.len(),
                r.visits_used,
                r.exhausted,
                times[0],
                times[times.len() - 1],
            )
            .map_err(CliError::failure)?;
        }
        if medians[1] > medians[0] {
            let _ = writeln!(
                err,
                "regression: width {width}: vf2pp median {:.3} ms > vf2 median {:.3} ms",
                medians[1], medians[0]
            );
        }
    }
    Ok(())
}

fn graph_cmd(circuit: &Path, mode: MatchMode, gates: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let c = load_circuit(circuit, gates)?;
    let mut value = build_interaction_graph(&c, mode).to_json_value();
    value["schema"] = json!("laymat/graph/v1");
    emit(out, &value)
}

fn validate_cmd(
    run: &RunConfig,
    device: &Path,
    shots: u64,
    top: Option<usize>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let c = load_circuit(&run.circuit, run.gates.as_deref())?;
    let d = load_device_file(device)?;
    let ranking = rank_on_device(&c, &d, &run.cost, &run.options())?;
    if ranking.ranked.is_empty() {
        return Err(SelectorError::NoEmbeddings {
            device: d.name,
            exhausted: ranking.exhausted,
        }
        .into());
    }
    let noise = NoiseModel::from_error_map(error_map(&d.calibration, run.mode), run.seed);
    let n = top.unwrap_or(ranking.ranked.len()).min(ranking.ranked.len());
    let mut results = Vec::with_capacity(n);
    for s in &ranking.ranked[..n] {
        let physical = remap(&c, &s.layout, d.coupling_map.num_qubits())?;
        let sim = simulate_fidelity(&physical, &noise, shots).map_err(CliError::failure)?;
        results.push((s, sim));
    }
    match run.format {
        OutputFormat::Table => {
            let mut t = String::from("rank  score         sim_fidelity  stderr     layout\n");
            for (i, (s, sim)) in results.iter().enumerate() {
                let _ = writeln!(t, "{:<5} {:<13.6e} {:<13.6} {:<10.2e} {}", i, s.score, sim.fidelity, sim.stderr, s.layout);
            }
            write!(out, "{t}").map_err(CliError::failure)
        }
        OutputFormat::Json => emit(
            out,
            &json!({
                "schema": "laymat/validate/v1",
                "device": d.name,
                "settings": settings(run),
                "shots": shots,
                "results": results.iter().map(|(s, sim)| json!({
                    "layout": s.layout,
                    "score": s.score,
                    "sim_fidelity": sim.fidelity,
                    "stderr": sim.stderr,
                })).collect::<Vec<_>>(),
            }),
        ),
    }
}

fn synth_device(
    topology: &str,
    profile: Profile,
    seed: u64,
    name: Option<&str>,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let size = |s: &str| s.parse::<usize>().map_err(|e| CliError::parse(format!("topology '{topology}': {e}")));
    let cm = if let Some(d) = topology.strip_prefix("heavy-hex:") {
        heavy_hex(size(d)?).map_err(CliError::parse)?
    } else if let Some(n) = topology.strip_prefix("line:") {
        line(size(n)?)
    } else {
        load_coupling_map(&read(Path::new(topology))?).map_err(|e| CliError::parse(format!("{topology}: {e}")))?
    };
    let cal = synth_calibration(&cm, seed, profile);
    let name = name.map(str::to_string).unwrap_or_else(|| cal.device_name.clone());
    let device = DeviceCandidate::new(&name, cm, cal)?;
    let text = device.to_json();
    match output {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::failure(format!("{}: {e}", path.display()))),
        None => writeln!(out, "{text}").map_err(CliError::failure),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::FindLayouts { run, device } => find_layouts(&run, &device, out),
        Command::Remap { run, device, output } => remap_cmd(&run, &device, &output, out),
        Command::SelectDevice { run, devices } => select_cmd(&run, &devices, out),
        Command::Bench {
            widths,
            distance,
            depth,
            runs,
            mode,
            seed,
        } => bench(&widths, distance, depth, runs, mode, seed, out, err),
        Command::Graph { circuit, mode, gates } => graph_cmd(&circuit, mode, gates.as_deref(), out),
        Command::Validate { run, device, shots, top } => validate_cmd(&run, &device, shots, top, out),
        Command::SynthDevice {
            topology,
            profile,
            seed,
            name,
            output,
        } => synth_device(&topology, profile, seed, name.as_deref(), output.as_deref(), out),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
