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

use serde::{Deserialize, Serialize};

use super::{CircuitError, Instruction, InstructionKind, QuantumCircuit};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstruction {
    name: String,
    qubits: Vec<usize>,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    clbits: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    num_qubits: usize,
    num_clbits: usize,
    instructions: Vec<RawInstruction>,
}

/// Parse circuit JSON. Gate names are not checked against a registry here;
/// use [`QuantumCircuit::validate`] for that.
pub fn parse_circuit_json(text: &str) -> Result<QuantumCircuit, CircuitError> {
    let raw: RawCircuit = serde_json::from_str(text).map_err(|e| CircuitError::Json(e.to_string()))?;
    let mut circuit = QuantumCircuit::new(raw.num_qubits, raw.num_clbits);
    for r in raw.instructions {
        let kind = InstructionKind::from_name(&r.name);
        if kind == InstructionKind::Measure && (r.qubits.len() != 1 || r.clbits.len() != 1) {
            return Err(CircuitError::Json("measure needs one qubit and one clbit".into()));
        }
        if kind != InstructionKind::Measure && !r.clbits.is_empty() {
            return Err(CircuitError::Json(format!("'{}' cannot carry clbits", r.name)));
        }
        if r.params.iter().any(|p| !p.is_finite()) {
            return Err(CircuitError::Json(format!("'{}' has a non-finite parameter", r.name)));
        }
        circuit.push(Instruction {
            kind,
            name: r.name,
            qubits: r.qubits,
            params: r.params,
            clbits: r.clbits,
        })?;
    }
    Ok(circuit)
}

pub(super) fn to_json(c: &QuantumCircuit) -> String {
    let raw = RawCircuit {
        num_qubits: c.num_qubits(),
        num_clbits: c.num_clbits(),
        instructions: c
            .instructions()
            .iter()
            .map(|i| RawInstruction {
                name: i.name.clone(),
                qubits: i.qubits.clone(),
                params: i.params.clone(),
                clbits: i.clbits.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("circuit JSON is always serializable")
}
