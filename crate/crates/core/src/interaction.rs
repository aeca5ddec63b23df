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

//! Interaction graphs: the pattern side of the embedding search.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{InstructionKind, QuantumCircuit};

/// Loose matching ignores edge direction and instruction availability;
/// strict matching respects both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    #[default]
    Loose,
    Strict,
}

/// Instruction name -> number of occurrences.
pub type OpCounts = BTreeMap<String, usize>;

/// Graph over the active virtual qubits of a circuit.
///
/// Two-qubit instructions are always recorded with their orientation; the
/// loose view merges `(a, b)` and `(b, a)` into one undirected edge.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    mode: MatchMode,
    num_qubits: usize,
    nodes: Vec<usize>,
    directed: BTreeMap<(usize, usize), OpCounts>,
    node_ops: BTreeMap<usize, OpCounts>,
}

/// Build the interaction graph of `c`.
///
/// Barriers are skipped. Qubits touched only by single-qubit instructions
/// become isolated nodes; qubits with no instructions at all are left out.
pub fn build_interaction_graph(c: &QuantumCircuit, mode: MatchMode) -> InteractionGraph {
    let mut directed: BTreeMap<(usize, usize), OpCounts> = BTreeMap::new();
    let mut node_ops: BTreeMap<usize, OpCounts> = BTreeMap::new();
    for instr in c.instructions() {
        if instr.kind == InstructionKind::Barrier {
            continue;
        }
        match instr.qubits.as_slice() {
            [q] => *node_ops.entry(*q).or_default().entry(instr.name.clone()).or_default() += 1,
            [a, b] => *directed.entry((*a, *b)).or_default().entry(instr.name.clone()).or_default() += 1,
            // Wider instructions have no coupling-map image; they still pin their qubits.
            qs => {
                for &q in qs {
                    node_ops.entry(q).or_default();
                }
            }
        }
    }
    InteractionGraph {
        mode,
        num_qubits: c.num_qubits(),
        nodes: c.active_qubits(),
        directed,
        node_ops,
    }
}

impl InteractionGraph {
    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    /// Number of virtual qubits in the source circuit (active or not).
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Active virtual qubits, ascending.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Edges in `mode`'s view with their instruction multisets. Loose edges are `(min, max)`.
    pub fn edges_in(&self, mode: MatchMode) -> BTreeMap<(usize, usize), OpCounts> {
        match mode {
            MatchMode::Strict => self.directed.clone(),
            MatchMode::Loose => {
                let mut merged: BTreeMap<(usize, usize), OpCounts> = BTreeMap::new();
                for (&(a, b), ops) in &self.directed {
                    let entry = merged.entry((a.min(b), a.max(b))).or_default();
                    for (name, n) in ops {
                        *entry.entry(name.clone()).or_default() += n;
                    }
                }
                merged
            }
        }
    }

    /// Edges in the graph's own mode.
    pub fn edges(&self) -> BTreeMap<(usize, usize), OpCounts> {
        self.edges_in(self.mode)
    }

    pub fn num_edges(&self) -> usize {
        match self.mode {
            MatchMode::Strict => self.directed.len(),
            MatchMode::Loose => self.edges_in(MatchMode::Loose).len(),
        }
    }

    /// Oriented two-qubit instruction multisets, regardless of mode.
    pub fn directed_edges(&self) -> &BTreeMap<(usize, usize), OpCounts> {
        &self.directed
    }

    pub fn node_ops(&self, q: usize) -> Option<&OpCounts> {
        self.node_ops.get(&q)
    }

    pub fn all_node_ops(&self) -> &BTreeMap<usize, OpCounts> {
        &self.node_ops
    }

    /// Same graph, viewed in another mode.
    pub fn with_mode(&self, mode: MatchMode) -> InteractionGraph {
        InteractionGraph { mode, ..self.clone() }
    }

    /// Debug JSON used by `laymat graph`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let edges: Vec<serde_json::Value> = self
            .edges()
            .into_iter()
            .map(|((a, b), ops)| serde_json::json!({ "qubits": [a, b], "ops": ops }))
            .collect();
        let node_ops: BTreeMap<String, &OpCounts> =
            self.node_ops.iter().map(|(q, ops)| (q.to_string(), ops)).collect();
        serde_json::json!({
            "mode": self.mode,
            "num_qubits": self.num_qubits,
            "nodes": self.nodes,
            "edges": edges,
            "node_ops": node_ops,
        })
    }
}
