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

//! Random routed circuits for tests and benchmarks.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Instruction, QuantumCircuit};
use crate::subiso::Layout;
use crate::topology::CouplingMap;

/// A circuit over virtual qubits together with the layout it was routed for.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedCircuit {
    pub circuit: QuantumCircuit,
    /// The placement the circuit was built against; always a valid embedding.
    pub layout: Layout,
}

/// Connected region of `width` physical qubits grown from a random seed node.
fn grow_region(cm: &CouplingMap, width: usize, rng: &mut ChaCha8Rng) -> Option<(Vec<usize>, Vec<(usize, usize)>)> {
    let n = cm.num_qubits();
    if width == 0 || width > n {
        return None;
    }
    let nbrs = |q: usize| -> BTreeSet<usize> { cm.successors(q).iter().chain(cm.predecessors(q)).copied().collect() };
    for _ in 0..64 {
        let start = rng.gen_range(0..n);
        let mut region = vec![start];
        let mut inside = vec![false; n];
        inside[start] = true;
        let mut tree = Vec::new();
        while region.len() < width {
            let frontier: Vec<(usize, usize)> = region
                .iter()
                .flat_map(|&u| nbrs(u).into_iter().filter(|&v| !inside[v]).map(move |v| (u, v)))
                .collect();
            let Some(&(u, v)) = frontier.choose(rng) else { break };
            inside[v] = true;
            region.push(v);
            tree.push((u, v));
        }
        if region.len() == width {
            return Some((region, tree));
        }
    }
    None
}

fn oriented(cm: &CouplingMap, a: usize, b: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    match (cm.has_edge(a, b), cm.has_edge(b, a)) {
        (true, true) => {
            if rng.gen_bool(0.5) {
                (a, b)
            } else {
                (b, a)
            }
        }
        (true, false) => (a, b),
        _ => (b, a),
    }
}

fn random_one_qubit(q: usize, rng: &mut ChaCha8Rng) -> Instruction {
    match rng.gen_range(0..4) {
        0 => Instruction::gate("sx", &[q], &[]),
        1 => Instruction::gate("x", &[q], &[]),
        2 => Instruction::gate("h", &[q], &[]),
        _ => Instruction::gate("rz", &[q], &[rng.gen_range(-PI..PI)]),
    }
}

/// Unitary body of a routed circuit: spanning-tree `cx` gates, then `depth`
/// layers of random single-qubit gates and random matchings of `cx` gates.
/// Every `cx` lies on a coupling-map edge in a supported direction.
fn routed_body(cm: &CouplingMap, width: usize, depth: usize, rng: &mut ChaCha8Rng) -> Option<(QuantumCircuit, Layout)> {
    let (region, tree) = grow_region(cm, width, rng)?;
    let mut virt_of = vec![usize::MAX; cm.num_qubits()];
    let mut labels: Vec<usize> = (0..width).collect();
    labels.shuffle(rng);
    let mut phys_of = vec![0; width];
    for (&p, &v) in region.iter().zip(&labels) {
        virt_of[p] = v;
        phys_of[v] = p;
    }
    let region_edges: Vec<(usize, usize)> = cm
        .undirected_edges()
        .into_iter()
        .filter(|&(a, b)| virt_of[a] != usize::MAX && virt_of[b] != usize::MAX)
        .collect();

    let mut c = QuantumCircuit::new(width, width);
    let cx = |c: &mut QuantumCircuit, a: usize, b: usize, rng: &mut ChaCha8Rng| {
        let (x, y) = oriented(cm, a, b, rng);
        c.gate("cx", &[virt_of[x], virt_of[y]], &[]).expect("region qubits are in range");
    };
    for &(u, v) in &tree {
        cx(&mut c, u, v, rng);
    }
    for _ in 0..depth {
        for q in 0..width {
            if rng.gen_bool(0.5) {
                c.push(random_one_qubit(q, rng)).expect("in range");
            }
        }
        let mut edges = region_edges.clone();
        edges.shuffle(rng);
        let mut busy = vec![false; cm.num_qubits()];
        for (a, b) in edges {
            if !busy[a] && !busy[b] && rng.gen_bool(0.7) {
                busy[a] = true;
                busy[b] = true;
                cx(&mut c, a, b, rng);
            }
        }
    }
    Some((c, Layout::total(&phys_of)))
}

fn measure_all(c: &mut QuantumCircuit) {
    for q in 0..c.num_qubits() {
        c.push(Instruction::measure(q, q)).expect("one clbit per qubit");
    }
}

/// Random circuit on `width` virtual qubits that is already routed to `cm`,
/// ending in a measurement of every qubit. `None` when `cm` has no connected
/// region of that size.
pub fn random_routed_circuit(cm: &CouplingMap, width: usize, depth: usize, seed: u64) -> Option<RoutedCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut circuit, layout) = routed_body(cm, width, depth, &mut rng)?;
    measure_all(&mut circuit);
    Some(RoutedCircuit { circuit, layout })
}

/// Inverse of a unitary instruction, when it has a registry spelling.
pub fn inverse(instr: &Instruction) -> Option<Instruction> {
    let p = &instr.params;
    let same = |params: Vec<f64>| Some(Instruction::gate(&instr.name, &instr.qubits, &params));
    let renamed = |name: &str| Some(Instruction::gate(name, &instr.qubits, &[]));
    match instr.name.as_str() {
        "id" | "x" | "y" | "z" | "h" | "cx" | "cy" | "cz" | "ch" | "swap" | "ecr" => same(vec![]),
        "s" => renamed("sdg"),
        "sdg" => renamed("s"),
        "t" => renamed("tdg"),
        "tdg" => renamed("t"),
        "sx" => renamed("sxdg"),
        "sxdg" => renamed("sx"),
        "rx" | "ry" | "rz" | "p" | "u1" | "cp" | "crz" | "rzz" | "rxx" => same(vec![-p[0]]),
        "u3" | "u" => same(vec![-p[0], -p[2], -p[1]]),
        "u2" => Some(Instruction::gate("u3", &instr.qubits, &[-PI / 2.0, -p[1], -p[0]])),
        _ => None,
    }
}

/// Routed circuit of the form `U; U^-1; measure all`, whose ideal output is all zeros.
pub fn random_mirror_circuit(cm: &CouplingMap, width: usize, depth: usize, seed: u64) -> Option<RoutedCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (body, layout) = routed_body(cm, width, depth, &mut rng)?;
    let mut circuit = body.clone();
    for instr in body.instructions().iter().rev() {
        circuit.push(inverse(instr).expect("generator only emits invertible gates")).expect("in range");
    }
    measure_all(&mut circuit);
    Some(RoutedCircuit { circuit, layout })
}
