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

use crate::interaction::{InteractionGraph, MatchMode};
use crate::topology::CouplingMap;

use super::{vf2pp_node_order, Layout, NodeOrdering, SearchBudget, SearchResult};

const NONE: usize = usize::MAX;

/// Directed adjacency with sorted neighbour lists.
struct Adjacency {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl Adjacency {
    fn has_edge(&self, a: usize, b: usize) -> bool {
        self.succ[a].binary_search(&b).is_ok()
    }
}

/// Terminal-set bookkeeping for one side of the match.
///
/// `mapped_pred[v]` counts mapped nodes with an edge into `v`; `v` is in the
/// out-terminal set when that is non-zero and `v` is unmapped.
struct Side {
    adj: Adjacency,
    core: Vec<usize>,
    mapped_pred: Vec<u32>,
    mapped_succ: Vec<u32>,
}

impl Side {
    fn new(adj: Adjacency) -> Self {
        let n = adj.succ.len();
        Side {
            adj,
            core: vec![NONE; n],
            mapped_pred: vec![0; n],
            mapped_succ: vec![0; n],
        }
    }

    fn set(&mut self, v: usize, image: usize) {
        self.core[v] = image;
        for &w in &self.adj.succ[v] {
            self.mapped_pred[w] += 1;
        }
        for &w in &self.adj.pred[v] {
            self.mapped_succ[w] += 1;
        }
    }

    fn unset(&mut self, v: usize) {
        self.core[v] = NONE;
        for &w in &self.adj.succ[v] {
            self.mapped_pred[w] -= 1;
        }
        for &w in &self.adj.pred[v] {
            self.mapped_succ[w] -= 1;
        }
    }

    /// (in T_out, in T_in, unmapped) counts over `nbrs`.
    fn classify(&self, nbrs: &[usize]) -> [u32; 3] {
        let mut counts = [0; 3];
        for &w in nbrs {
            if self.core[w] != NONE {
                continue;
            }
            counts[2] += 1;
            if self.mapped_pred[w] > 0 {
                counts[0] += 1;
            }
            if self.mapped_succ[w] > 0 {
                counts[1] += 1;
            }
        }
        counts
    }
}

pub(super) struct Matcher<'a> {
    target_map: &'a CouplingMap,
    mode: MatchMode,
    budget: SearchBudget,
    /// Local pattern index -> virtual qubit.
    virt: Vec<usize>,
    num_virtual: usize,
    /// Search rank of each local pattern node.
    rank: Vec<usize>,
    pattern: Side,
    target: Side,
    /// Strict-mode availability: instruction names per local node and per local directed edge.
    node_ops: Vec<Vec<String>>,
    edge_ops: Vec<Vec<(usize, Vec<String>)>>,
    check_ops: bool,
    visits: u64,
    stopped: bool,
    layouts: Vec<Layout>,
}

impl<'a> Matcher<'a> {
    pub(super) fn new(
        pattern: &InteractionGraph,
        target: &'a CouplingMap,
        mode: MatchMode,
        ordering: NodeOrdering,
        budget: SearchBudget,
    ) -> Self {
        let virt = pattern.nodes().to_vec();
        let local = |q: usize| virt.binary_search(&q).expect("edge endpoint is an active node");
        let k = virt.len();

        let mut p_adj = Adjacency {
            succ: vec![Vec::new(); k],
            pred: vec![Vec::new(); k],
        };
        let mut edge_ops: Vec<Vec<(usize, Vec<String>)>> = vec![Vec::new(); k];
        for ((a, b), ops) in pattern.edges_in(mode) {
            let (a, b) = (local(a), local(b));
            p_adj.succ[a].push(b);
            p_adj.pred[b].push(a);
            if mode == MatchMode::Loose {
                p_adj.succ[b].push(a);
                p_adj.pred[a].push(b);
            } else {
                edge_ops[a].push((b, ops.keys().cloned().collect()));
            }
        }
        for list in p_adj.succ.iter_mut().chain(p_adj.pred.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let node_ops = virt
            .iter()
            .map(|&q| pattern.node_ops(q).map(|ops| ops.keys().cloned().collect()).unwrap_or_default())
            .collect();

        let t_adj = match mode {
            MatchMode::Strict => Adjacency {
                succ: (0..target.num_qubits()).map(|q| target.successors(q).to_vec()).collect(),
                pred: (0..target.num_qubits()).map(|q| target.predecessors(q).to_vec()).collect(),
            },
            MatchMode::Loose => {
                let nbrs: Vec<Vec<usize>> = (0..target.num_qubits())
                    .map(|q| {
                        let mut v: Vec<usize> =
                            target.successors(q).iter().chain(target.predecessors(q)).copied().collect();
                        v.sort_unstable();
                        v.dedup();
                        v
                    })
                    .collect();
                Adjacency {
                    succ: nbrs.clone(),
                    pred: nbrs,
                }
            }
        };

        let order: Vec<usize> = match ordering {
            NodeOrdering::Vf2 => (0..k).collect(),
            NodeOrdering::Vf2pp => vf2pp_node_order(pattern).into_iter().map(local).collect(),
        };
        let mut rank = vec![0; k];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }

        Matcher {
            target_map: target,
            mode,
            budget,
            virt,
            num_virtual: pattern.num_qubits(),
            rank,
            pattern: Side::new(p_adj),
            target: Side::new(t_adj),
            node_ops,
            edge_ops,
            check_ops: mode == MatchMode::Strict && target.supported_ops().is_some(),
            visits: 0,
            stopped: false,
            layouts: Vec::new(),
        }
    }

    pub(super) fn run(mut self) -> SearchResult {
        if self.virt.len() > self.target.core.len() {
            return SearchResult {
                layouts: Vec::new(),
                exhausted: true,
                visits_used: 0,
            };
        }
        self.extend(0);
        SearchResult {
            layouts: self.layouts,
            exhausted: !self.stopped,
            visits_used: self.visits,
        }
    }

    fn extend(&mut self, depth: usize) {
        if depth == self.virt.len() {
            self.record();
            return;
        }
        let n = self.next_node();
        for m in self.candidates(n) {
            if let Some(limit) = self.budget.max_state_visits {
                if self.visits >= limit.get() {
                    self.stopped = true;
                    return;
                }
            }
            self.visits += 1;
            if !self.feasible(n, m) {
                continue;
            }
            self.pattern.set(n, m);
            self.target.set(m, n);
            self.extend(depth + 1);
            self.pattern.unset(n);
            self.target.unset(m);
            if self.stopped {
                return;
            }
        }
    }

    fn record(&mut self) {
        let mut mapping = vec![None; self.num_virtual];
        for (i, &q) in self.virt.iter().enumerate() {
            mapping[q] = Some(self.pattern.core[i]);
        }
        self.layouts.push(Layout(mapping));
        if let Some(limit) = self.budget.max_layouts {
            if self.layouts.len() as u64 >= limit.get() {
                self.stopped = true;
            }
        }
    }

    /// Lowest-rank unmapped node in T_out, else in T_in, else overall.
    fn next_node(&self) -> usize {
        let p = &self.pattern;
        let unmapped = (0..self.virt.len()).filter(|&v| p.core[v] == NONE);
        let pick = |filter: &dyn Fn(usize) -> bool| unmapped.clone().filter(|&v| filter(v)).min_by_key(|&v| self.rank[v]);
        pick(&|v| p.mapped_pred[v] > 0)
            .or_else(|| pick(&|v| p.mapped_succ[v] > 0))
            .or_else(|| pick(&|_| true))
            .expect("an unmapped pattern node remains")
    }

    /// Target nodes worth trying for `n`, ascending.
    fn candidates(&self, n: usize) -> Vec<usize> {
        let p = &self.pattern;
        let t = &self.target;
        let anchored = p.adj.pred[n]
            .iter()
            .filter(|&&u| p.core[u] != NONE)
            .map(|&u| &t.adj.succ[p.core[u]])
            .chain(
                p.adj.succ[n]
                    .iter()
                    .filter(|&&u| p.core[u] != NONE)
                    .map(|&u| &t.adj.pred[p.core[u]]),
            )
            .min_by_key(|list| list.len());
        match anchored {
            Some(list) => list.iter().copied().filter(|&m| t.core[m] == NONE).collect(),
            None => (0..t.core.len()).filter(|&m| t.core[m] == NONE).collect(),
        }
    }

    fn feasible(&self, n: usize, m: usize) -> bool {
        let p = &self.pattern;
        let t = &self.target;
        if p.adj.succ[n].len() > t.adj.succ[m].len() || p.adj.pred[n].len() > t.adj.pred[m].len() {
            return false;
        }
        for &u in &p.adj.succ[n] {
            let img = p.core[u];
            if img != NONE && !t.adj.has_edge(m, img) {
                return false;
            }
        }
        for &u in &p.adj.pred[n] {
            let img = p.core[u];
            if img != NONE && !t.adj.has_edge(img, m) {
                return false;
            }
        }
        if self.check_ops && !self.ops_available(n, m) {
            return false;
        }
        // Look-ahead: every unmapped pattern neighbour needs a distinct unmapped
        // target neighbour in the same terminal class.
        let ps = p.classify(&p.adj.succ[n]);
        let ts = t.classify(&t.adj.succ[m]);
        let pp = p.classify(&p.adj.pred[n]);
        let tp = t.classify(&t.adj.pred[m]);
        (0..3).all(|i| ps[i] <= ts[i] && pp[i] <= tp[i])
    }

    fn ops_available(&self, n: usize, m: usize) -> bool {
        let cm = self.target_map;
        if !self.node_ops[n].iter().all(|name| cm.supports(name, &[m])) {
            return false;
        }
        debug_assert_eq!(self.mode, MatchMode::Strict);
        // Outgoing edges to mapped nodes.
        for (u, names) in &self.edge_ops[n] {
            let img = self.pattern.core[*u];
            if img != NONE && !names.iter().all(|name| cm.supports(name, &[m, img])) {
                return false;
            }
        }
        // Incoming edges from mapped nodes.
        for &u in &self.pattern.adj.pred[n] {
            let img = self.pattern.core[u];
            if img == NONE {
                continue;
            }
            let names = &self.edge_ops[u]
                .iter()
                .find(|(v, _)| *v == n)
                .expect("pattern predecessor has an edge entry")
                .1;
            if !names.iter().all(|name| cm.supports(name, &[img, m])) {
                return false;
            }
        }
        true
    }
}
