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

//! Routed quantum circuits over virtual qubits.
//!
//! A [`QuantumCircuit`] is a flat, ordered list of [`Instruction`]s. Circuits
//! are read from a small OpenQASM 2 subset ([`parse_circuit`]) or from JSON
//! ([`parse_circuit_json`]) and written back with [`serialize_circuit`].

mod json;
mod qasm;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use json::parse_circuit_json;
pub use qasm::{parse_circuit, parse_circuit_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstructionKind {
    Gate,
    Measure,
    Reset,
    Barrier,
}

impl InstructionKind {
    /// Kind implied by an instruction name.
    pub fn from_name(name: &str) -> Self {
        match name {
            "measure" => InstructionKind::Measure,
            "reset" => InstructionKind::Reset,
            "barrier" => InstructionKind::Barrier,
            _ => InstructionKind::Gate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub kind: InstructionKind,
    pub name: String,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
    pub clbits: Vec<usize>,
}

impl Instruction {
    pub fn gate(name: &str, qubits: &[usize], params: &[f64]) -> Self {
        Instruction {
            kind: InstructionKind::Gate,
            name: name.to_string(),
            qubits: qubits.to_vec(),
            params: params.to_vec(),
            clbits: Vec::new(),
        }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Instruction {
            kind: InstructionKind::Measure,
            name: "measure".to_string(),
            qubits: vec![qubit],
            params: Vec::new(),
            clbits: vec![clbit],
        }
    }

    pub fn reset(qubit: usize) -> Self {
        Instruction {
            kind: InstructionKind::Reset,
            name: "reset".to_string(),
            qubits: vec![qubit],
            params: Vec::new(),
            clbits: Vec::new(),
        }
    }

    pub fn barrier(qubits: &[usize]) -> Self {
        Instruction {
            kind: InstructionKind::Barrier,
            name: "barrier".to_string(),
            qubits: qubits.to_vec(),
            params: Vec::new(),
            clbits: Vec::new(),
        }
    }

    pub fn is_barrier(&self) -> bool {
        self.kind == InstructionKind::Barrier
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown gate '{name}'")]
    UnknownGate {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("gate '{name}' expects {expected} qubit(s), got {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("gate '{name}' expects {expected} parameter(s), got {found}")]
    ParamMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{what} index {index} out of range (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("instruction '{name}' repeats qubit {qubit}")]
    DuplicateQubit { name: String, qubit: usize },
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("invalid circuit JSON: {0}")]
    Json(String),
}

/// Declared shape of a gate: how many qubits it acts on and how many angles it takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSpec {
    pub arity: usize,
    pub params: usize,
}

/// Name to [`GateSpec`] lookup used to validate parsed circuits.
///
/// The default registry covers the usual `qelib1.inc` gates plus the native
/// IBM basis (`sx`, `ecr`, ...). Extra gates can be registered at runtime or
/// loaded from a JSON object of the form `{"name": {"arity": 2, "params": 0}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateRegistry {
    gates: BTreeMap<String, GateSpec>,
}

const DEFAULT_GATES: &[(&str, usize, usize)] = &[
    ("id", 1, 0),
    ("x", 1, 0),
    ("y", 1, 0),
    ("z", 1, 0),
    ("h", 1, 0),
    ("s", 1, 0),
    ("sdg", 1, 0),
    ("t", 1, 0),
    ("tdg", 1, 0),
    ("sx", 1, 0),
    ("sxdg", 1, 0),
    ("rx", 1, 1),
    ("ry", 1, 1),
    ("rz", 1, 1),
    ("p", 1, 1),
    ("u1", 1, 1),
    ("u2", 1, 2),
    ("u3", 1, 3),
    ("u", 1, 3),
    ("cx", 2, 0),
    ("cy", 2, 0),
    ("cz", 2, 0),
    ("ch", 2, 0),
    ("swap", 2, 0),
    ("ecr", 2, 0),
    ("iswap", 2, 0),
    ("cp", 2, 1),
    ("crz", 2, 1),
    ("rzz", 2, 1),
    ("rxx", 2, 1),
];

impl Default for GateRegistry {
    fn default() -> Self {
        let gates = DEFAULT_GATES
            .iter()
            .map(|&(name, arity, params)| (name.to_string(), GateSpec { arity, params }))
            .collect();
        GateRegistry { gates }
    }
}

impl GateRegistry {
    pub fn empty() -> Self {
        GateRegistry {
            gates: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: &str, spec: GateSpec) {
        self.gates.insert(name.to_string(), spec);
    }

    pub fn get(&self, name: &str) -> Option<GateSpec> {
        self.gates.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.gates.keys().map(String::as_str)
    }

    /// Extend the registry with entries from a JSON object.
    pub fn extend_from_json(&mut self, text: &str) -> Result<(), CircuitError> {
        let extra: BTreeMap<String, GateSpec> =
            serde_json::from_str(text).map_err(|e| CircuitError::Json(e.to_string()))?;
        for (name, spec) in extra {
            if spec.arity == 0 {
                return Err(CircuitError::Json(format!("gate '{name}' has arity 0")));
            }
            self.gates.insert(name, spec);
        }
        Ok(())
    }
}

/// Ordered instruction list over `num_qubits` virtual qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuantumCircuit {
    num_qubits: usize,
    num_clbits: usize,
    instructions: Vec<Instruction>,
}

impl QuantumCircuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        QuantumCircuit {
            num_qubits,
            num_clbits,
            instructions: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Append an instruction after checking index ranges and qubit distinctness.
    pub fn push(&mut self, instr: Instruction) -> Result<(), CircuitError> {
        for (i, &q) in instr.qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(CircuitError::IndexOutOfRange {
                    what: "qubit",
                    index: q,
                    size: self.num_qubits,
                });
            }
            if instr.qubits[..i].contains(&q) {
                return Err(CircuitError::DuplicateQubit {
                    name: instr.name.clone(),
                    qubit: q,
                });
            }
        }
        for &c in &instr.clbits {
            if c >= self.num_clbits {
                return Err(CircuitError::IndexOutOfRange {
                    what: "clbit",
                    index: c,
                    size: self.num_clbits,
                });
            }
        }
        if instr.kind == InstructionKind::Barrier && !instr.params.is_empty() {
            return Err(CircuitError::Unsupported("barrier with parameters".into()));
        }
        self.instructions.push(instr);
        Ok(())
    }

    /// Convenience wrapper over [`QuantumCircuit::push`] for gates.
    pub fn gate(&mut self, name: &str, qubits: &[usize], params: &[f64]) -> Result<(), CircuitError> {
        self.push(Instruction::gate(name, qubits, params))
    }

    /// Check every gate against `registry` (name known, arity and parameter count match).
    pub fn validate(&self, registry: &GateRegistry) -> Result<(), CircuitError> {
        for instr in &self.instructions {
            check_against_registry(instr, registry, 0, 0)?;
        }
        Ok(())
    }

    /// Gate names appearing in the circuit (measure/reset/barrier excluded).
    pub fn basis(&self) -> BTreeSet<&str> {
        self.instructions
            .iter()
            .filter(|i| i.kind == InstructionKind::Gate)
            .map(|i| i.name.as_str())
            .collect()
    }

    /// Virtual qubits touched by at least one non-barrier instruction.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_qubits];
        for instr in self.instructions.iter().filter(|i| !i.is_barrier()) {
            for &q in &instr.qubits {
                seen[q] = true;
            }
        }
        (0..self.num_qubits).filter(|&q| seen[q]).collect()
    }

    /// Copy of the circuit with every barrier removed.
    pub fn without_barriers(&self) -> QuantumCircuit {
        QuantumCircuit {
            num_qubits: self.num_qubits,
            num_clbits: self.num_clbits,
            instructions: self
                .instructions
                .iter()
                .filter(|i| !i.is_barrier())
                .cloned()
                .collect(),
        }
    }
}

pub(crate) fn check_against_registry(
    instr: &Instruction,
    registry: &GateRegistry,
    line: usize,
    column: usize,
) -> Result<(), CircuitError> {
    match instr.kind {
        InstructionKind::Gate => {
            let spec = registry.get(&instr.name).ok_or_else(|| CircuitError::UnknownGate {
                line,
                column,
                name: instr.name.clone(),
            })?;
            if spec.arity != instr.qubits.len() {
                return Err(CircuitError::ArityMismatch {
                    name: instr.name.clone(),
                    expected: spec.arity,
                    found: instr.qubits.len(),
                });
            }
            if spec.params != instr.params.len() {
                return Err(CircuitError::ParamMismatch {
                    name: instr.name.clone(),
                    expected: spec.params,
                    found: instr.params.len(),
                });
            }
        }
        InstructionKind::Measure => {
            if instr.qubits.len() != 1 || instr.clbits.len() != 1 {
                return Err(CircuitError::ArityMismatch {
                    name: instr.name.clone(),
                    expected: 1,
                    found: instr.qubits.len(),
                });
            }
        }
        InstructionKind::Reset => {
            if instr.qubits.len() != 1 {
                return Err(CircuitError::ArityMismatch {
                    name: instr.name.clone(),
                    expected: 1,
                    found: instr.qubits.len(),
                });
            }
        }
        InstructionKind::Barrier => {
            if instr.qubits.is_empty() {
                return Err(CircuitError::ArityMismatch {
                    name: instr.name.clone(),
                    expected: 1,
                    found: 0,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitFormat {
    Qasm,
    Json,
}

/// Render a circuit as QASM-subset text or as circuit JSON.
pub fn serialize_circuit(c: &QuantumCircuit, format: CircuitFormat) -> String {
    match format {
        CircuitFormat::Qasm => qasm::to_qasm(c),
        CircuitFormat::Json => json::to_json(c),
    }
}

/// Parse either format, picking JSON when the text starts with `{`.
pub fn parse_circuit_auto(text: &str, registry: &GateRegistry) -> Result<QuantumCircuit, CircuitError> {
    if text.trim_start().starts_with('{') {
        let c = parse_circuit_json(text)?;
        c.validate(registry)?;
        Ok(c)
    } else {
        parse_circuit_with(text, registry)
    }
}

impl fmt::Display for QuantumCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&qasm::to_qasm(self))
    }
}
