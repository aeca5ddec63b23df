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

use laymat::calibration::{error_map, synth_calibration, Profile};
use laymat::circuit::{
    parse_circuit, parse_circuit_auto, parse_circuit_json, serialize_circuit, CircuitError, CircuitFormat,
    GateRegistry, Instruction, InstructionKind, QuantumCircuit,
};
use laymat::interaction::{build_interaction_graph, MatchMode};
use laymat::scoring::score_default;
use laymat::subiso::Layout;
use proptest::prelude::*;

/// GHZ on three qubits, hand-routed onto Nairobi: virtual 0, 1, 2 sit on
/// physical 1, 0, 2 and the circuit fans out from the hub.
const GHZ_ROUTED: &str = "OPENQASM 2.0;
include \"qelib1.inc\";
qreg q[7];
creg c[3];
h q[1];
cx q[1],q[0];
cx q[1],q[2];
barrier q[0],q[1],q[2];
measure q[1] -> c[0];
measure q[0] -> c[1];
measure q[2] -> c[2];
";

#[test]
fn minimal_programs() {
    let c = parse_circuit("qreg q[2]; cx q[0],q[1];").unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c.instructions()[0], Instruction::gate("cx", &[0, 1], &[]));

    let c = parse_circuit("qreg q[1]; creg c[1]; h q[0]; measure q[0] -> c[0];").unwrap();
    assert_eq!(c.len(), 2);
    assert_eq!(c.instructions()[1].kind, InstructionKind::Measure);
}

#[test]
fn routed_ghz_sits_on_coupling_edges() {
    let c = parse_circuit(GHZ_ROUTED).unwrap();
    let cm = common::nairobi();
    for i in c.instructions().iter().filter(|i| i.qubits.len() == 2 && !i.is_barrier()) {
        assert!(cm.has_edge(i.qubits[0], i.qubits[1]), "{:?} is off the map", i.qubits);
    }
    assert_eq!(c.basis(), ["cx", "h"].into_iter().collect());
}

#[test]
fn parse_errors_are_specific() {
    assert!(matches!(parse_circuit("qreg q[2]; foo q[0];"), Err(CircuitError::UnknownGate { .. })));
    assert!(matches!(parse_circuit("qreg q[2]; cx q[0];"), Err(CircuitError::ArityMismatch { .. })));
    assert!(matches!(parse_circuit("qreg q[2]; x q[2];"), Err(CircuitError::IndexOutOfRange { .. })));
    assert!(matches!(parse_circuit("qreg q[2]; cx q[0],q[0];"), Err(CircuitError::DuplicateQubit { .. })));
    assert!(matches!(parse_circuit("qreg q[2];\n  x q[0]"), Err(CircuitError::Syntax { .. })));
    assert!(parse_circuit("qreg q[1]; creg c[1]; if (c==1) x q[0];").is_err());
}

#[test]
fn syntax_errors_carry_position() {
    let err = parse_circuit("qreg q[2];\nx q[0]\n").unwrap_err();
    let CircuitError::Syntax { line, .. } = err else { panic!("{err:?}") };
    assert!(line >= 2);
}

#[test]
fn empty_circuit_is_header_only() {
    let c = QuantumCircuit::new(0, 0);
    let text = serialize_circuit(&c, CircuitFormat::Qasm);
    assert!(text.lines().all(|l| !l.contains(';') || l.starts_with("OPENQASM") || l.starts_with("include")));
    assert_eq!(parse_circuit(&text).unwrap(), c);
}

#[test]
fn registry_extension() {
    let mut reg = GateRegistry::default();
    assert!(parse_circuit_auto("qreg q[2]; mygate q[0],q[1];", &reg).is_err());
    reg.extend_from_json(r#"{"mygate": {"arity": 2, "params": 0}}"#).unwrap();
    let c = parse_circuit_auto("qreg q[2]; mygate q[0],q[1];", &reg).unwrap();
    assert_eq!(c.instructions()[0].name, "mygate");
}

#[test]
fn auto_detects_json() {
    let c = parse_circuit(GHZ_ROUTED).unwrap();
    let json = serialize_circuit(&c, CircuitFormat::Json);
    assert_eq!(parse_circuit_auto(&json, &GateRegistry::default()).unwrap(), c);
}

#[derive(Debug, Clone)]
enum Op {
    One(usize, usize, f64),
    Two(usize, usize, usize),
    Measure(usize, usize),
    Reset(usize),
    Barrier(Vec<usize>),
}

const ONE: [&str; 6] = ["x", "sx", "h", "rz", "id", "sxdg"];
const TWO: [&str; 3] = ["cx", "cz", "ecr"];

fn op(n: usize) -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (0..ONE.len(), 0..n, -10.0f64..10.0).prop_map(|(g, q, p)| Op::One(g, q, p)),
        3 => (0..TWO.len(), 0..n, 1..n).prop_map(move |(g, a, d)| Op::Two(g, a, (a + d) % n)),
        1 => (0..n, 0..n).prop_map(|(q, c)| Op::Measure(q, c)),
        1 => (0..n).prop_map(Op::Reset),
        1 => proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n).prop_map(Op::Barrier),
    ]
}

fn build(n: usize, ops: &[Op]) -> QuantumCircuit {
    let mut c = QuantumCircuit::new(n, n);
    for o in ops {
        let instr = match o {
            Op::One(g, q, p) => {
                let params = if ONE[*g] == "rz" { vec![*p] } else { vec![] };
                Instruction::gate(ONE[*g], &[*q], &params)
            }
            Op::Two(g, a, b) => Instruction::gate(TWO[*g], &[*a, *b], &[]),
            Op::Measure(q, cl) => Instruction::measure(*q, *cl),
            Op::Reset(q) => Instruction::reset(*q),
            Op::Barrier(qs) => Instruction::barrier(qs),
        };
        c.push(instr).unwrap();
    }
    c
}

fn circuit(len: std::ops::Range<usize>) -> impl Strategy<Value = QuantumCircuit> {
    (2usize..6).prop_flat_map(move |n| proptest::collection::vec(op(n), len.clone()).prop_map(move |ops| build(n, &ops)))
}

proptest! {
    #[test]
    fn qasm_round_trip(c in circuit(0..60)) {
        let text = serialize_circuit(&c, CircuitFormat::Qasm);
        let back = parse_circuit(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(serialize_circuit(&back, CircuitFormat::Qasm), text);
    }

    #[test]
    fn json_round_trip(c in circuit(0..60)) {
        let text = serialize_circuit(&c, CircuitFormat::Json);
        let back = parse_circuit_json(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(serialize_circuit(&back, CircuitFormat::Json), text);
    }

    #[test]
    fn long_circuits_reserialize_identically(c in circuit(200..201)) {
        prop_assert_eq!(c.len(), 200);
        for format in [CircuitFormat::Qasm, CircuitFormat::Json] {
            let text = serialize_circuit(&c, format);
            let back = parse_circuit_auto(&text, &GateRegistry::default()).unwrap();
            prop_assert_eq!(serialize_circuit(&back, format), text);
        }
    }

    #[test]
    fn barrier_transparency(c in circuit(0..40), seed in any::<u64>()) {
        let stripped = c.without_barriers();
        prop_assert!(stripped.instructions().iter().all(|i| !i.is_barrier()));
        for mode in [MatchMode::Loose, MatchMode::Strict] {
            prop_assert_eq!(build_interaction_graph(&c, mode), build_interaction_graph(&stripped, mode));
        }
        // Scores: place the circuit on a line so every layout is scoreable in loose mode.
        let cm = laymat::topology::line(c.num_qubits());
        let em = error_map(&synth_calibration(&cm, seed, Profile::Gradient), MatchMode::Loose);
        let layout = Layout::identity(c.num_qubits());
        prop_assert_eq!(score_default(&c, &layout, &em).unwrap(), score_default(&stripped, &layout, &em).unwrap());
    }
}
