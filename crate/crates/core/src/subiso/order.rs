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

use std::cmp::Reverse;
use std::collections::BTreeSet;

use crate::interaction::{InteractionGraph, MatchMode};

/// Search order over the pattern's active qubits.
///
/// Each connected component is expanded breadth-first from its highest-degree
/// node (lowest index on ties). Within a BFS level, nodes are taken greedily by
/// most already-ordered neighbours, then highest degree, then lowest index.
/// Components start in the same root order, so the sequence is a total,
/// deterministic order. Degrees are taken on the undirected view.
pub fn vf2pp_node_order(pattern: &InteractionGraph) -> Vec<usize> {
    let nodes = pattern.nodes();
    let local = |q: usize| nodes.binary_search(&q).expect("edge endpoint is an active node");
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
    for &(a, b) in pattern.edges_in(MatchMode::Loose).keys() {
        let (a, b) = (local(a), local(b));
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let deg: Vec<usize> = adj.iter().map(BTreeSet::len).collect();

    let mut ordered = vec![false; nodes.len()];
    let mut seen = vec![false; nodes.len()];
    let mut conn = vec![0usize; nodes.len()];
    let mut order = Vec::with_capacity(nodes.len());

    while order.len() < nodes.len() {
        let root = (0..nodes.len())
            .filter(|&v| !seen[v])
            .max_by_key(|&v| (deg[v], Reverse(v)))
            .expect("unordered node remains");
        seen[root] = true;
        let mut level = vec![root];
        while !level.is_empty() {
            let mut pending = level.clone();
            while !pending.is_empty() {
                let (pos, _) = pending
                    .iter()
                    .enumerate()
                    .max_by_key(|&(_, &v)| (conn[v], deg[v], Reverse(v)))
                    .expect("pending is non-empty");
                let v = pending.swap_remove(pos);
                ordered[v] = true;
                order.push(v);
                for &w in &adj[v] {
                    conn[w] += 1;
                }
            }
            let mut next = Vec::new();
            for &v in &level {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            level = next;
        }
    }
    debug_assert!(ordered.iter().all(|&o| o));
    order.into_iter().map(|v| nodes[v]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::QuantumCircuit;
    use crate::interaction::build_interaction_graph;

    fn graph(n: usize, edges: &[(usize, usize)]) -> InteractionGraph {
        let mut c = QuantumCircuit::new(n, 0);
        for &(a, b) in edges {
            c.gate("cx", &[a, b], &[]).unwrap();
        }
        build_interaction_graph(&c, MatchMode::Loose)
    }

    #[test]
    fn star_centre_first() {
        let order = vf2pp_node_order(&graph(4, &[(1, 0), (2, 0), (0, 3)]));
        assert_eq!(order[0], 0);
        assert_eq!(order.len(), 4);
    }

    #[test]
    fn path_middle_first() {
        assert_eq!(vf2pp_node_order(&graph(3, &[(0, 1), (1, 2)])), vec![1, 0, 2]);
    }

    #[test]
    fn disconnected_components_in_root_order() {
        let g = graph(4, &[(2, 3), (0, 1)]);
        let first = vf2pp_node_order(&g);
        assert_eq!(first, vec![0, 1, 2, 3]);
        for _ in 0..100 {
            assert_eq!(vf2pp_node_order(&g), first);
        }
    }

    #[test]
    fn higher_degree_component_goes_first() {
        // Component {3,4,5} has a degree-2 node; {0,1} does not.
        assert_eq!(vf2pp_node_order(&graph(6, &[(0, 1), (3, 4), (4, 5)])), vec![4, 3, 5, 0, 1]);
    }

    #[test]
    fn every_level_node_follows_a_neighbour() {
        // Cycle plus tail: after the root, each node has an ordered neighbour.
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5)]);
        let order = vf2pp_node_order(&g);
        assert_eq!(order[0], 3);
        let edges = g.edges_in(MatchMode::Loose);
        for i in 1..order.len() {
            let v = order[i];
            assert!(order[..i]
                .iter()
                .any(|&u| edges.contains_key(&(u.min(v), u.max(v)))));
        }
    }
}
