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

mod common;

use std::collections::BTreeSet;

use laymat::circuit::{parse_circuit, QuantumCircuit};
use laymat::gen::random_routed_circuit;
use laymat::interaction::{build_interaction_graph, MatchMode, OpCounts};
use laymat::topology::heavy_hex;
use proptest::prelude::*;
use rand::seq::SliceRandom;

// GHZ hand-routed onto Nairobi, as in the circuit-model fixture.
const GHZ_ROUTED: &str = "qreg q[7]; creg c[3];
h q[1]; cx q[1],q[0]; cx q[1],q[2];
barrier q[0],q[1],q[2];
measure q[1] -> c[0]; measure q[0] -> c[1]; measure q[2] -> c[2];";

#[test]
fn routed_ghz_graph() {
    let c = parse_circuit(GHZ_ROUTED).unwrap();
    let g = build_interaction_graph(&c, MatchMode::Loose);
    // Hub 1 with spokes 0 and 2; the four unused wires drop out.
    assert_eq!(g.nodes(), &[0, 1, 2]);
    assert_eq!(g.edges().keys().copied().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    assert_eq!(g.node_ops(1).unwrap(), &OpCounts::from([("h".into(), 1), ("measure".into(), 1)]));
    let strict = build_interaction_graph(&c, MatchMode::Strict);
    assert_eq!(strict.edges().keys().copied().collect::<Vec<_>>(), vec![(1, 0), (1, 2)]);
}

#[test]
fn parallel_cx_examples() {
    let c = parse_circuit("qreg q[2]; cx q[0],q[1]; cx q[0],q[1]; cx q[1],q[0];").unwrap();
    let loose = build_interaction_graph(&c, MatchMode::Loose);
    assert_eq!(loose.num_edges(), 1);
    let strict = build_interaction_graph(&c, MatchMode::Strict);
    assert_eq!(strict.num_edges(), 2);
    assert_eq!(strict.edges()[&(0, 1)], OpCounts::from([("cx".into(), 2)]));
    assert_eq!(strict.edges()[&(1, 0)], OpCounts::from([("cx".into(), 1)]));
}

#[test]
fn json_view_is_stable() {
    let c = parse_circuit(GHZ_ROUTED).unwrap();
    let v = build_interaction_graph(&c, MatchMode::Loose).to_json_value();
    assert_eq!(v["mode"], "loose");
    assert_eq!(v["num_qubits"], 7);
    assert_eq!(v["edges"][0]["qubits"], serde_json::json!([0, 1]));
}

proptest! {
    #[test]
    fn loose_graph_of_routed_circuit_fits_its_map(
        width in 1usize..8, depth in 0usize..6, seed in any::<u64>(), d in 2usize..4,
    ) {
        let cm = heavy_hex(d).unwrap();
        let routed = random_routed_circuit(&cm, width, depth, seed).unwrap();
        let g = build_interaction_graph(&routed.circuit, MatchMode::Loose);
        let und = cm.undirected_edges();
        for (a, b) in g.edges().keys() {
            prop_assert!(a < b);
            let (pa, pb) = (routed.layout.get(*a).unwrap(), routed.layout.get(*b).unwrap());
            prop_assert!(und.contains(&(pa.min(pb), pa.max(pb))));
        }
    }

    #[test]
    fn every_edge_has_a_two_qubit_instruction(
        width in 2usize..6, depth in 0usize..6, seed in any::<u64>(),
    ) {
        let cm = heavy_hex(3).unwrap();
        let c = random_routed_circuit(&cm, width, depth, seed).unwrap().circuit;
        let pairs: BTreeSet<(usize, usize)> = c
            .instructions()
            .iter()
            .filter(|i| i.qubits.len() == 2 && !i.is_barrier())
            .map(|i| (i.qubits[0], i.qubits[1]))
            .collect();
        let strict = build_interaction_graph(&c, MatchMode::Strict);
        prop_assert_eq!(strict.edges().keys().copied().collect::<BTreeSet<_>>(), pairs.clone());
        let loose = build_interaction_graph(&c, MatchMode::Loose);
        let merged: BTreeSet<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        prop_assert_eq!(loose.edges().keys().copied().collect::<BTreeSet<_>>(), merged);
        prop_assert!(loose.edges().keys().all(|(a, b)| a != b));
    }

    #[test]
    fn instruction_order_is_irrelevant(width in 1usize..6, depth in 0usize..6, seed in any::<u64>()) {
        let cm = heavy_hex(3).unwrap();
        let c = random_routed_circuit(&cm, width, depth, seed).unwrap().circuit;
        let mut instrs = c.instructions().to_vec();
        instrs.shuffle(&mut common::rng(seed ^ 0x5eed));
        let mut shuffled = QuantumCircuit::new(c.num_qubits(), c.num_clbits());
        for i in instrs {
            shuffled.push(i).unwrap();
        }
        for mode in [MatchMode::Loose, MatchMode::Strict] {
            prop_assert_eq!(build_interaction_graph(&c, mode), build_interaction_graph(&shuffled, mode));
        }
    }
}
