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

//! End-to-end selection: search, score, pick a device, remap.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{error_map, CalibrationError, CalibrationSnapshot};
use crate::circuit::{Instruction, QuantumCircuit};
use crate::interaction::{build_interaction_graph, InteractionGraph, MatchMode};
use crate::scoring::{rank_layouts, CostFunction, ScoreError, ScoredLayout, DEFAULT_TIE_TOL};
use crate::subiso::{find_embeddings, Layout, NodeOrdering, SearchBudget, SearchResult};
use crate::topology::{CouplingMap, TopologyError};

/// Skip reason for devices the circuit cannot be placed on.
pub const INSUFFICIENT_EMBEDDING: &str = "insufficient embedding";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectorError {
    #[error("invalid device file: {0}")]
    Json(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("no embedding of the circuit into device '{device}'{}", if *.exhausted { "" } else { " (search budget hit)" })]
    NoEmbeddings { device: String, exhausted: bool },
    #[error("fleet is empty")]
    EmptyFleet,
    #[error("every device was skipped")]
    AllSkipped(Box<SelectionReport>),
    #[error("layout does not fit the circuit: {0}")]
    LayoutMismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceCandidate {
    pub name: String,
    pub coupling_map: CouplingMap,
    pub calibration: CalibrationSnapshot,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    name: String,
    coupling_map: serde_json::Value,
    calibration: serde_json::Value,
}

impl DeviceCandidate {
    /// Pair a map with its calibration, checking that they describe the same device.
    pub fn new(name: &str, coupling_map: CouplingMap, calibration: CalibrationSnapshot) -> Result<Self, SelectorError> {
        calibration.check_against(&coupling_map)?;
        Ok(DeviceCandidate {
            name: name.to_string(),
            coupling_map,
            calibration,
        })
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "name": self.name,
            "coupling_map": self.coupling_map.to_value(),
            "calibration": self.calibration.to_value(),
        });
        serde_json::to_string_pretty(&value).expect("device JSON is always serializable")
    }
}

/// Parse a device file: `{"name": ..., "coupling_map": {...}, "calibration": {...}}`.
pub fn load_device(json: &str) -> Result<DeviceCandidate, SelectorError> {
    let raw: RawDevice = serde_json::from_str(json).map_err(|e| SelectorError::Json(e.to_string()))?;
    let cm = CouplingMap::from_value(raw.coupling_map)?;
    let cal = CalibrationSnapshot::from_value(raw.calibration)?;
    DeviceCandidate::new(&raw.name, cm, cal)
}

/// Knobs shared by every selection entry point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectOptions {
    pub mode: MatchMode,
    pub ordering: NodeOrdering,
    pub budget: SearchBudget,
    pub tol: f64,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            mode: MatchMode::Loose,
            ordering: NodeOrdering::Vf2pp,
            budget: SearchBudget::unlimited(),
            tol: DEFAULT_TIE_TOL,
        }
    }
}

/// Every embedding on one device, ranked.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceRanking {
    pub ranked: Vec<ScoredLayout>,
    pub exhausted: bool,
    pub visits_used: u64,
}

fn rank_found(
    c: &QuantumCircuit,
    found: &SearchResult,
    device: &DeviceCandidate,
    cost: &dyn CostFunction,
    opts: &SelectOptions,
) -> Result<DeviceRanking, SelectorError> {
    let em = error_map(&device.calibration, opts.mode);
    let ranked = rank_layouts(c, &found.layouts, cost, &em, &device.calibration, opts.tol)?;
    Ok(DeviceRanking {
        ranked,
        exhausted: found.exhausted,
        visits_used: found.visits_used,
    })
}

/// Search and rank all layouts of `c` on `device`.
pub fn rank_on_device(
    c: &QuantumCircuit,
    device: &DeviceCandidate,
    cost: &dyn CostFunction,
    opts: &SelectOptions,
) -> Result<DeviceRanking, SelectorError> {
    let pattern = build_interaction_graph(c, opts.mode);
    let found = find_embeddings(&pattern, &device.coupling_map, opts.mode, opts.ordering, opts.budget);
    rank_found(c, &found, device, cost, opts)
}

/// Lowest-cost layout of `c` on `device` (head of the ranking).
pub fn best_layout(
    c: &QuantumCircuit,
    device: &DeviceCandidate,
    cost: &dyn CostFunction,
    opts: &SelectOptions,
) -> Result<ScoredLayout, SelectorError> {
    let ranking = rank_on_device(c, device, cost, opts)?;
    ranking.ranked.into_iter().next().ok_or(SelectorError::NoEmbeddings {
        device: device.name.clone(),
        exhausted: ranking.exhausted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceReport {
    pub device: String,
    pub best: Option<ScoredLayout>,
    pub skip_reason: Option<String>,
    pub exhausted: bool,
    pub num_layouts: usize,
    /// Earlier device whose embedding search was reused, if any.
    pub search_shared_with: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Winner {
    pub device: String,
    pub layout: ScoredLayout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub devices: Vec<DeviceReport>,
    pub winner: Option<Winner>,
    /// Distinct embedding searches actually run.
    pub searches: usize,
}

/// Embedding-reuse key: the matched edge set plus, in strict mode, availability.
fn topology_key(cm: &CouplingMap, mode: MatchMode) -> String {
    match mode {
        MatchMode::Loose => {
            let edges: Vec<(usize, usize)> = cm.undirected_edges().into_iter().collect();
            format!("{}|{:?}", cm.num_qubits(), edges)
        }
        MatchMode::Strict => {
            let edges: Vec<(usize, usize)> = cm.edges().collect();
            format!("{}|{:?}|{:?}", cm.num_qubits(), edges, cm.supported_ops())
        }
    }
}

/// Best layout on each device of `fleet` and the overall winner.
///
/// Devices sharing a coupling map share one embedding search. Devices without
/// any embedding are skipped. Ties on score go to the earlier device.
pub fn select_device(
    c: &QuantumCircuit,
    fleet: &[DeviceCandidate],
    cost: &dyn CostFunction,
    opts: &SelectOptions,
) -> Result<SelectionReport, SelectorError> {
    if fleet.is_empty() {
        return Err(SelectorError::EmptyFleet);
    }
    let pattern: InteractionGraph = build_interaction_graph(c, opts.mode);

    let mut first_with_key: HashMap<String, usize> = HashMap::new();
    let mut owner = Vec::with_capacity(fleet.len());
    for (i, d) in fleet.iter().enumerate() {
        owner.push(*first_with_key.entry(topology_key(&d.coupling_map, opts.mode)).or_insert(i));
    }
    let mut unique: Vec<usize> = first_with_key.into_values().collect();
    unique.sort_unstable();
    let searches: HashMap<usize, SearchResult> = unique
        .par_iter()
        .map(|&i| {
            let found = find_embeddings(&pattern, &fleet[i].coupling_map, opts.mode, opts.ordering, opts.budget);
            (i, found)
        })
        .collect();

    let devices: Vec<DeviceReport> = fleet
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let found = &searches[&owner[i]];
            let mut report = DeviceReport {
                device: d.name.clone(),
                best: None,
                skip_reason: None,
                exhausted: found.exhausted,
                num_layouts: found.layouts.len(),
                search_shared_with: (owner[i] != i).then(|| fleet[owner[i]].name.clone()),
            };
            if found.layouts.is_empty() {
                report.skip_reason = Some(if found.exhausted {
                    INSUFFICIENT_EMBEDDING.to_string()
                } else {
                    format!("{INSUFFICIENT_EMBEDDING} (search budget hit)")
                });
                return report;
            }
            match rank_found(c, found, d, cost, opts) {
                Ok(r) => report.best = r.ranked.into_iter().next(),
                Err(e) => report.skip_reason = Some(format!("scoring failed: {e}")),
            }
            report
        })
        .collect();

    let mut winner: Option<Winner> = None;
    for r in &devices {
        if let Some(best) = &r.best {
            if winner.as_ref().map_or(true, |w| best.score < w.layout.score) {
                winner = Some(Winner {
                    device: r.device.clone(),
                    layout: best.clone(),
                });
            }
        }
    }
    let report = SelectionReport {
        devices,
        winner,
        searches: unique.len(),
    };
    if report.winner.is_none() {
        return Err(SelectorError::AllSkipped(Box::new(report)));
    }
    Ok(report)
}

/// Extend `layout` to every virtual qubit: unplaced wires take the unused
/// physical qubits in ascending order.
pub fn complete_layout(layout: &Layout, num_physical: usize) -> Result<Layout, SelectorError> {
    if !layout.is_injective() {
        return Err(SelectorError::LayoutMismatch("layout is not injective".into()));
    }
    if let Some(p) = layout.as_slice().iter().flatten().find(|&&p| p >= num_physical) {
        return Err(SelectorError::LayoutMismatch(format!(
            "physical qubit {p} outside a {num_physical}-qubit device"
        )));
    }
    if layout.len() > num_physical {
        return Err(SelectorError::LayoutMismatch(format!(
            "{} virtual qubits do not fit {num_physical} physical qubits",
            layout.len()
        )));
    }
    let mut used = vec![false; num_physical];
    for &p in layout.as_slice().iter().flatten() {
        used[p] = true;
    }
    let mut free = (0..num_physical).filter(|&p| !used[p]);
    let full = layout
        .as_slice()
        .iter()
        .map(|p| p.or_else(|| free.next()))
        .collect();
    Ok(Layout::new(full))
}

/// Rewrite `c` onto `num_physical` physical qubits through `layout`.
///
/// Instruction order, names, parameters and clbits are untouched.
pub fn remap(c: &QuantumCircuit, layout: &Layout, num_physical: usize) -> Result<QuantumCircuit, SelectorError> {
    if layout.len() != c.num_qubits() {
        return Err(SelectorError::LayoutMismatch(format!(
            "layout has {} entries, circuit has {} qubits",
            layout.len(),
            c.num_qubits()
        )));
    }
    let full = complete_layout(layout, num_physical)?;
    let mut out = QuantumCircuit::new(num_physical, c.num_clbits());
    for instr in c.instructions() {
        let qubits = full.map_qubits(&instr.qubits).expect("completed layout places every qubit");
        out.push(Instruction {
            qubits,
            ..instr.clone()
        })
        .expect("injective image of a valid instruction is valid");
    }
    Ok(out)
}
