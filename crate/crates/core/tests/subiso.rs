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
use laymat::interaction::{build_interaction_graph, MatchMode};
use laymat::subiso::{find_embeddings, verify_layout, vf2pp_node_order, Layout, NodeOrdering, SearchBudget};
use laymat::topology::{heavy_hex, CouplingMap};
use proptest::prelude::*;

const ORDERINGS: [NodeOrdering; 2] = [NodeOrdering::Vf2, NodeOrdering::Vf2pp];
const MODES: [MatchMode; 2] = [MatchMode::Loose, MatchMode::Strict];

fn layouts(c: &QuantumCircuit, cm: &CouplingMap, mode: MatchMode, ordering: NodeOrdering) -> BTreeSet<Layout> {
    let g = build_interaction_graph(c, mode);
    let r = find_embeddings(&g, cm, mode, ordering, SearchBudget::unlimited());
    assert!(r.exhausted);
    let set: BTreeSet<Layout> = r.layouts.iter().cloned().collect();
    assert_eq!(set.len(), r.layouts.len(), "duplicate layouts");
    set
}

#[test]
fn nairobi_counts_match_brute_force() {
    let cm = common::nairobi();
    let edge = parse_circuit("qreg q[2]; cx q[0],q[1];").unwrap();
    let path = parse_circuit("qreg q[3]; cx q[0],q[1]; cx q[1],q[2];").unwrap();
    assert_eq!(common::brute_force_embeddings(&edge, &cm, MatchMode::Loose).len(), 12);
    assert_eq!(common::brute_force_embeddings(&path, &cm, MatchMode::Loose).len(), 14);
    for ordering in ORDERINGS {
        assert_eq!(layouts(&edge, &cm, MatchMode::Loose, ordering).len(), 12);
        assert_eq!(layouts(&path, &cm, MatchMode::Loose, ordering).len(), 14);
    }
}

#[test]
fn self_embedding_contains_identity() {
    let hh = heavy_hex(3).unwrap();
    let mut c = QuantumCircuit::new(hh.num_qubits(), 0);
    for (a, b) in hh.edges().filter(|(a, b)| a < b) {
        c.gate("cx", &[a, b], &[]).unwrap();
    }
    for ordering in ORDERINGS {
        assert!(layouts(&c, &hh, MatchMode::Loose, ordering).contains(&Layout::identity(hh.num_qubits())));
    }
}

#[test]
fn pigeonhole() {
    let c = parse_circuit("qreg q[3]; cx q[0],q[1]; cx q[1],q[2];").unwrap();
    let tiny = CouplingMap::new(2, [(0, 1), (1, 0)]).unwrap();
    let g = build_interaction_graph(&c, MatchMode::Loose);
    let r = find_embeddings(&g, &tiny, MatchMode::Loose, NodeOrdering::Vf2pp, SearchBudget::from_counts(1, 1));
    assert!(r.layouts.is_empty());
    assert!(r.exhausted);
}

#[test]
fn vf2pp_order_examples() {
    let star = build_interaction_graph(
        &parse_circuit("qreg q[4]; cx q[1],q[0]; cx q[2],q[0]; cx q[0],q[3];").unwrap(),
        MatchMode::Loose,
    );
    assert_eq!(vf2pp_node_order(&star)[0], 0);
    let path = build_interaction_graph(&parse_circuit("qreg q[3]; cx q[0],q[1]; cx q[1],q[2];").unwrap(), MatchMode::Loose);
    assert_eq!(vf2pp_node_order(&path)[0], 1);
    // Two disconnected edges: the component holding the lowest index goes first.
    let pairs = build_interaction_graph(&parse_circuit("qreg q[4]; cx q[2],q[3]; cx q[0],q[1];").unwrap(), MatchMode::Loose);
    let first = vf2pp_node_order(&pairs);
    assert_eq!(first, vec![0, 1, 2, 3]);
    for _ in 0..100 {
        assert_eq!(vf2pp_node_order(&pairs), first);
    }
}

#[test]
fn strict_respects_orientation_and_ops() {
    let c = parse_circuit("qreg q[2]; cx q[0],q[1]; x q[1];").unwrap();
    let cm = laymat::topology::load_coupling_map(
        r#"{"num_qubits":3,"edges":[[0,1],[1,2],[2,1]],"supported_ops":{"cx":[[0,1],[1,2]],"x":[[1],[2]]}}"#,
    )
    .unwrap();
    let strict = layouts(&c, &cm, MatchMode::Strict, NodeOrdering::Vf2pp);
    assert_eq!(strict, BTreeSet::from([Layout::total(&[0, 1]), Layout::total(&[1, 2])]));
    let loose = layouts(&c, &cm, MatchMode::Loose, NodeOrdering::Vf2pp);
    assert_eq!(loose.len(), 4);
}

#[test]
fn layout_budget_truncates() {
    let cm = common::nairobi();
    let c = parse_circuit("qreg q[2]; cx q[0],q[1];").unwrap();
    let g = build_interaction_graph(&c, MatchMode::Loose);
    let r = find_embeddings(&g, &cm, MatchMode::Loose, NodeOrdering::Vf2pp, SearchBudget::from_counts(0, 5));
    assert_eq!(r.layouts.len(), 5);
    assert!(!r.exhausted);
}

#[test]
fn deterministic_discovery_order() {
    let hh = heavy_hex(5).unwrap();
    let routed = random_routed_circuit(&hh, 6, 4, 11).unwrap();
    let g = build_interaction_graph(&routed.circuit, MatchMode::Loose);
    for ordering in ORDERINGS {
        let a = find_embeddings(&g, &hh, MatchMode::Loose, ordering, SearchBudget::unlimited());
        let b = find_embeddings(&g, &hh, MatchMode::Loose, ordering, SearchBudget::unlimited());
        assert_eq!(a, b);
    }
}

fn instance() -> impl Strategy<Value = (QuantumCircuit, CouplingMap)> {
    (any::<u64>(), 1usize..=5, 2usize..=8, 0.15f64..0.7, any::<bool>()).prop_map(|(seed, n, m, density, ops)| {
        let mut rng = common::rng(seed);
        let c = common::random_pattern(&mut rng, n, 2 * n);
        let cm = common::random_target(&mut rng, m, density, ops);
        (c, cm)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_brute_force((c, cm) in instance()) {
        for mode in MODES {
            let expected = common::brute_force_embeddings(&c, &cm, mode);
            for ordering in ORDERINGS {
                prop_assert_eq!(&layouts(&c, &cm, mode, ordering), &expected, "{:?} {:?}", mode, ordering);
            }
        }
    }

    #[test]
    fn every_layout_verifies((c, cm) in instance()) {
        for mode in MODES {
            let g = build_interaction_graph(&c, mode);
            for l in find_embeddings(&g, &cm, mode, NodeOrdering::Vf2pp, SearchBudget::unlimited()).layouts {
                prop_assert!(verify_layout(&g, &cm, mode, &l));
                prop_assert!(l.is_injective());
            }
        }
    }

    #[test]
    fn budgets_are_monotone((c, cm) in instance(), a in 1u64..200, b in 1u64..200) {
        let (lo, hi) = (a.min(b), a.max(b));
        for mode in MODES {
            let g = build_interaction_graph(&c, mode);
            for ordering in ORDERINGS {
                let run = |v: u64| -> BTreeSet<Layout> {
                    find_embeddings(&g, &cm, mode, ordering, SearchBudget::from_counts(v, 0)).layouts.into_iter().collect()
                };
                let full = run(0);
                let (small, large) = (run(lo), run(hi));
                prop_assert!(small.is_subset(&large));
                prop_assert!(large.is_subset(&full));
            }
        }
    }

    #[test]
    fn exhausted_only_without_budget_hit((c, cm) in instance(), v in 1u64..50) {
        let g = build_interaction_graph(&c, MatchMode::Loose);
        let r = find_embeddings(&g, &cm, MatchMode::Loose, NodeOrdering::Vf2pp, SearchBudget::from_counts(v, 0));
        prop_assert!(r.visits_used <= v);
        if !r.exhausted {
            prop_assert_eq!(r.visits_used, v);
        }
    }

    #[test]
    fn orderings_agree_on_heavy_hex(width in 1usize..9, depth in 0usize..4, seed in any::<u64>()) {
        let hh = heavy_hex(3).unwrap();
        let routed = random_routed_circuit(&hh, width, depth, seed).unwrap();
        let a = layouts(&routed.circuit, &hh, MatchMode::Loose, NodeOrdering::Vf2);
        let b = layouts(&routed.circuit, &hh, MatchMode::Loose, NodeOrdering::Vf2pp);
        prop_assert!(a.contains(&routed.layout));
        prop_assert_eq!(a, b);
    }
}
