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

//! Device coupling maps and synthetic topologies.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("invalid coupling map JSON: {0}")]
    Json(String),
    #[error("edge ({0}, {1}) references a qubit outside 0..{2}")]
    DanglingEdge(usize, usize, usize),
    #[error("self-loop on qubit {0}")]
    SelfLoop(usize),
    #[error("supported op '{name}' references qubit {qubit} outside 0..{size}")]
    DanglingOp { name: String, qubit: usize, size: usize },
    #[error("heavy-hex parameter must be at least 2, got {0}")]
    InvalidSize(usize),
}

/// Which instructions exist on which physical qubits or qubit tuples.
pub type SupportedOps = BTreeMap<String, BTreeSet<Vec<usize>>>;

/// Directed graph of physical qubits with optional per-instruction availability.
///
/// When `supported_ops` is absent every instruction is considered available on
/// every qubit and every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    num_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
    supported_ops: Option<SupportedOps>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCouplingMap {
    num_qubits: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    supported_ops: Option<BTreeMap<String, Vec<Vec<usize>>>>,
}

impl CouplingMap {
    pub fn new(
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TopologyError> {
        Self::with_supported_ops(num_qubits, edges, None)
    }

    pub fn with_supported_ops(
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        supported_ops: Option<SupportedOps>,
    ) -> Result<Self, TopologyError> {
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        for &(a, b) in &edges {
            if a >= num_qubits || b >= num_qubits {
                return Err(TopologyError::DanglingEdge(a, b, num_qubits));
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
        }
        if let Some(ops) = &supported_ops {
            for (name, locations) in ops {
                for &q in locations.iter().flatten() {
                    if q >= num_qubits {
                        return Err(TopologyError::DanglingOp {
                            name: name.clone(),
                            qubit: q,
                            size: num_qubits,
                        });
                    }
                }
            }
        }
        let mut succ = vec![Vec::new(); num_qubits];
        let mut pred = vec![Vec::new(); num_qubits];
        for &(a, b) in &edges {
            succ[a].push(b);
            pred[b].push(a);
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
        }
        Ok(CouplingMap {
            num_qubits,
            edges,
            supported_ops,
            succ,
            pred,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> impl DoubleEndedIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b))
    }

    /// Successors of `q`, ascending.
    pub fn successors(&self, q: usize) -> &[usize] {
        &self.succ[q]
    }

    /// Predecessors of `q`, ascending.
    pub fn predecessors(&self, q: usize) -> &[usize] {
        &self.pred[q]
    }

    pub fn supported_ops(&self) -> Option<&SupportedOps> {
        self.supported_ops.as_ref()
    }

    /// Whether instruction `name` is available on `qubits`.
    pub fn supports(&self, name: &str, qubits: &[usize]) -> bool {
        match &self.supported_ops {
            None => true,
            Some(ops) => ops.get(name).is_some_and(|locs| locs.contains(qubits)),
        }
    }

    /// Unordered edge pairs `(min, max)`, each listed once.
    pub fn undirected_edges(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
    }

    /// Symmetric copy: every edge in both orientations, with two-qubit
    /// availability merged across orientations.
    pub fn undirected_view(&self) -> CouplingMap {
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .flat_map(|&(a, b)| [(a, b), (b, a)])
            .collect();
        let supported_ops = self.supported_ops.as_ref().map(|ops| {
            ops.iter()
                .map(|(name, locs)| {
                    let mut merged = locs.clone();
                    for loc in locs.iter().filter(|l| l.len() == 2) {
                        merged.insert(vec![loc[1], loc[0]]);
                    }
                    (name.clone(), merged)
                })
                .collect()
        });
        CouplingMap::with_supported_ops(self.num_qubits, edges, supported_ops)
            .expect("symmetrising a valid map keeps it valid")
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges.iter().all(|&(a, b)| self.edges.contains(&(b, a)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("coupling map JSON is always serializable")
    }

    pub(crate) fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_raw()).expect("coupling map JSON is always serializable")
    }

    fn to_raw(&self) -> RawCouplingMap {
        RawCouplingMap {
            num_qubits: self.num_qubits,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            supported_ops: self
                .supported_ops
                .as_ref()
                .map(|ops| ops.iter().map(|(k, v)| (k.clone(), v.iter().cloned().collect())).collect()),
        }
    }

    pub(crate) fn from_value(value: serde_json::Value) -> Result<Self, TopologyError> {
        let raw: RawCouplingMap = serde_json::from_value(value).map_err(|e| TopologyError::Json(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawCouplingMap) -> Result<Self, TopologyError> {
        let ops = raw
            .supported_ops
            .map(|ops| ops.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect());
        CouplingMap::with_supported_ops(raw.num_qubits, raw.edges.into_iter().map(|[a, b]| (a, b)), ops)
    }
}

/// Parse coupling-map JSON: `{"num_qubits": N, "edges": [[a, b], ...], "supported_ops": {...}}`.
pub fn load_coupling_map(json: &str) -> Result<CouplingMap, TopologyError> {
    let raw: RawCouplingMap = serde_json::from_str(json).map_err(|e| TopologyError::Json(e.to_string()))?;
    CouplingMap::from_raw(raw)
}

/// Number of qubits in [`heavy_hex`]`(d)`.
pub fn heavy_hex_num_qubits(d: usize) -> usize {
    let width = 2 * d - 1;
    d * width + (0..d - 1).map(|k| bridge_columns(k, width).len()).sum::<usize>()
}

// Columns of row `k` that get a bridge down to row `k + 1`. Interior bridges sit
// four columns apart, alternating between 1 mod 4 and 3 mod 4 so that a node is
// never bridged both up and down. A row end three columns past the nearest
// interior bridge closes a boundary half-cell with one more bridge.
fn bridge_columns(k: usize, width: usize) -> Vec<usize> {
    let offset = if k % 2 == 0 { 1 } else { 3 };
    let interior: Vec<usize> = (offset..width).step_by(4).collect();
    let mut cols = Vec::with_capacity(interior.len() + 2);
    if interior.first() == Some(&3) {
        cols.push(0);
    }
    cols.extend(&interior);
    if let Some(&last) = interior.last() {
        if last + 3 == width - 1 {
            cols.push(width - 1);
        }
    }
    cols
}

/// Heavy-hex lattice with `d` rows of `2d - 1` qubits joined by bridge qubits.
///
/// Numbering is row-major: row 0, then the bridges below it from left to
/// right, then row 1, and so on. `heavy_hex(2)` is the 7-qubit H-shaped
/// Falcon/Nairobi map, and odd `d` give `(5d² - 2d - 1) / 2` qubits
/// (`heavy_hex(23)` has 1299). Every edge is present in both orientations.
pub fn heavy_hex(d: usize) -> Result<CouplingMap, TopologyError> {
    if d < 2 {
        return Err(TopologyError::InvalidSize(d));
    }
    let width = 2 * d - 1;
    let mut edges = Vec::new();
    let mut next = 0usize;
    let mut pending: Vec<(usize, usize)> = Vec::new(); // (bridge node, column)
    for k in 0..d {
        let row: Vec<usize> = (next..next + width).collect();
        next += width;
        for pair in row.windows(2) {
            edges.push((pair[0], pair[1]));
        }
        for &(bridge, col) in &pending {
            edges.push((bridge, row[col]));
        }
        pending.clear();
        if k + 1 < d {
            for col in bridge_columns(k, width) {
                edges.push((row[col], next));
                pending.push((next, col));
                next += 1;
            }
        }
    }
    CouplingMap::new(next, edges.into_iter().flat_map(|(a, b)| [(a, b), (b, a)]))
}

/// Undirected line 0-1-...-(n-1), both orientations.
pub fn line(n: usize) -> CouplingMap {
    CouplingMap::new(n, (1..n).flat_map(|i| [(i - 1, i), (i, i - 1)])).expect("line map is valid")
}
