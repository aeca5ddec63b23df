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

//! Subgraph-monomorphism search from interaction graphs into coupling maps.

mod order;
mod vf2;

use std::fmt;
use std::num::NonZeroU64;

use serde::{Deserialize, Serialize};

use crate::interaction::{InteractionGraph, MatchMode};
use crate::topology::CouplingMap;

pub use order::vf2pp_node_order;

/// Virtual -> physical assignment, indexed by virtual qubit.
///
/// Virtual qubits that are not part of the pattern (idle wires) map to `None`.
/// Ordering is lexicographic over the physical tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout(Vec<Option<usize>>);

impl Layout {
    pub fn new(mapping: Vec<Option<usize>>) -> Self {
        Layout(mapping)
    }

    /// A layout that places every virtual qubit.
    pub fn total(mapping: &[usize]) -> Self {
        Layout(mapping.iter().map(|&p| Some(p)).collect())
    }

    pub fn identity(n: usize) -> Self {
        Layout((0..n).map(Some).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, virt: usize) -> Option<usize> {
        self.0.get(virt).copied().flatten()
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.0
    }

    /// Image of a tuple of virtual qubits, or `None` if any of them is unplaced.
    pub fn map_qubits(&self, qubits: &[usize]) -> Option<Vec<usize>> {
        qubits.iter().map(|&q| self.get(q)).collect()
    }

    /// True when no two placed virtual qubits share a physical qubit.
    pub fn is_injective(&self) -> bool {
        let mut seen: Vec<usize> = self.0.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match p {
                Some(p) => write!(f, "{p}")?,
                None => write!(f, "-")?,
            }
        }
        write!(f, "]")
    }
}

/// Limits on a search. `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_state_visits: Option<NonZeroU64>,
    pub max_layouts: Option<NonZeroU64>,
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        SearchBudget::default()
    }

    /// Budget from plain counts; zero means unlimited.
    pub fn from_counts(max_state_visits: u64, max_layouts: u64) -> Self {
        SearchBudget {
            max_state_visits: NonZeroU64::new(max_state_visits),
            max_layouts: NonZeroU64::new(max_layouts),
        }
    }

    pub fn is_unlimited(&self) -> bool {
        self.max_state_visits.is_none() && self.max_layouts.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub layouts: Vec<Layout>,
    /// False when a budget cut the search short.
    pub exhausted: bool,
    pub visits_used: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NodeOrdering {
    /// Pattern nodes in ascending virtual-qubit order.
    Vf2,
    /// Degree-driven breadth-first order from `vf2pp_node_order`.
    #[default]
    Vf2pp,
}

/// Enumerate every monomorphism of `pattern` into `target`.
///
/// Loose mode matches the undirected views and ignores `supported_ops`.
/// Strict mode matches oriented edges and requires every node and edge
/// instruction of the pattern to be available at its image. Layouts come out
/// in discovery order, which is deterministic for fixed inputs.
pub fn find_embeddings(
    pattern: &InteractionGraph,
    target: &CouplingMap,
    mode: MatchMode,
    ordering: NodeOrdering,
    budget: SearchBudget,
) -> SearchResult {
    vf2::Matcher::new(pattern, target, mode, ordering, budget).run()
}

/// Independent check that `layout` is a valid embedding of `pattern` into `target`.
pub fn verify_layout(pattern: &InteractionGraph, target: &CouplingMap, mode: MatchMode, layout: &Layout) -> bool {
    if layout.len() != pattern.num_qubits() || !layout.is_injective() {
        return false;
    }
    let placed = |q: usize| layout.get(q).filter(|&p| p < target.num_qubits());
    if pattern.nodes().iter().any(|&q| placed(q).is_none()) {
        return false;
    }
    match mode {
        MatchMode::Loose => pattern.edges_in(MatchMode::Loose).keys().all(|&(a, b)| {
            let (pa, pb) = (placed(a).unwrap(), placed(b).unwrap());
            target.has_edge(pa, pb) || target.has_edge(pb, pa)
        }),
        MatchMode::Strict => {
            let edges_ok = pattern.directed_edges().iter().all(|(&(a, b), ops)| {
                let (pa, pb) = (placed(a).unwrap(), placed(b).unwrap());
                target.has_edge(pa, pb) && ops.keys().all(|name| target.supports(name, &[pa, pb]))
            });
            let nodes_ok = pattern
                .all_node_ops()
                .iter()
                .all(|(&q, ops)| ops.keys().all(|name| target.supports(name, &[placed(q).unwrap()])));
            edges_ok && nodes_ok
        }
    }
}
