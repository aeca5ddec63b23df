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

//! Stochastic Pauli-trajectory simulator used to validate scores.
//!
//! Each shot samples which instructions suffer an error; an erring instruction
//! is followed by a uniformly random non-identity Pauli on its qubits. The
//! output distribution of a sampled trajectory, including measurement
//! statistics and readout flips, is then computed exactly, and the shots are
//! averaged. Trajectories with the same error pattern are simulated once.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{CalibrationError, ErrorMap};
use crate::circuit::{InstructionKind, QuantumCircuit};

/// Largest number of active qubits the simulator accepts.
pub const MAX_ACTIVE_QUBITS: usize = 10;
/// Largest number of distinct classical bits a circuit may write.
pub const MAX_MEASURED_CLBITS: usize = 16;
const MAX_BRANCHES: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("circuit has {0} active qubits; at most {MAX_ACTIVE_QUBITS} are simulated")]
    TooManyQubits(usize),
    #[error("circuit writes {0} classical bits; at most {MAX_MEASURED_CLBITS} are supported")]
    TooManyClbits(usize),
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("circuit has no measurements")]
    NoMeasurements,
    #[error("no simulation rule for '{name}' on {arity} qubit(s)")]
    UnsupportedGate { name: String, arity: usize },
    #[error("mid-circuit measurement and reset branch into more than {MAX_BRANCHES} states")]
    TooManyBranches,
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}

/// Error rates for the simulator plus the seed of its shot streams.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    error_map: Option<ErrorMap>,
    pub seed: u64,
}

impl NoiseModel {
    /// Instruction errors become depolarizing probabilities; measurement errors become readout flips.
    pub fn from_error_map(em: ErrorMap, seed: u64) -> Self {
        NoiseModel {
            error_map: Some(em),
            seed,
        }
    }

    pub fn noiseless(seed: u64) -> Self {
        NoiseModel { error_map: None, seed }
    }

    fn error(&self, name: &str, qubits: &[usize]) -> Result<f64, NoiseError> {
        match &self.error_map {
            None => Ok(0.0),
            Some(em) => Ok(em.error(name, qubits)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Bhattacharyya overlap `sum_i sqrt(p_i q_i)` of noisy and ideal output distributions.
    pub fidelity: f64,
    /// Delta-method standard error of `fidelity` over trajectories.
    pub stderr: f64,
    pub shots: u64,
}

type M2 = [[C; 2]; 2];
type M4 = [[C; 4]; 4];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn u3(theta: f64, phi: f64, lam: f64) -> M2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [
        [c(co, 0.0), -C::from_polar(s, lam)],
        [C::from_polar(s, phi), C::from_polar(co, phi + lam)],
    ]
}

fn pauli(code: u8) -> M2 {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match code {
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        3 => [[o, z], [z, -o]],
        _ => [[o, z], [z, o]],
    }
}

fn one_qubit_matrix(name: &str, p: &[f64]) -> Option<M2> {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    let h = c(FRAC_1_SQRT_2, 0.0);
    let diag = |phase: f64| [[o, z], [z, C::from_polar(1.0, phase)]];
    let arg = |k: usize| p.get(k).copied();
    Some(match name {
        "id" => pauli(0),
        "x" => pauli(1),
        "y" => pauli(2),
        "z" => pauli(3),
        "h" => [[h, h], [h, -h]],
        "s" => diag(std::f64::consts::FRAC_PI_2),
        "sdg" => diag(-std::f64::consts::FRAC_PI_2),
        "t" => diag(std::f64::consts::FRAC_PI_4),
        "tdg" => diag(-std::f64::consts::FRAC_PI_4),
        "sx" => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        "sxdg" => [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]],
        "rx" => {
            let (s, co) = (arg(0)? / 2.0).sin_cos();
            [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
        }
        "ry" => {
            let (s, co) = (arg(0)? / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        "rz" => {
            let t = arg(0)?;
            [[C::from_polar(1.0, -t / 2.0), z], [z, C::from_polar(1.0, t / 2.0)]]
        }
        "p" | "u1" => diag(arg(0)?),
        "u2" => u3(std::f64::consts::FRAC_PI_2, arg(0)?, arg(1)?),
        "u3" | "u" => u3(arg(0)?, arg(1)?, arg(2)?),
        _ => return None,
    })
}

/// Two-qubit matrix with the first listed qubit as the high bit.
fn two_qubit_matrix(name: &str, p: &[f64]) -> Option<M4> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let controlled = |u: M2| {
        let mut m = [[z; 4]; 4];
        m[0][0] = o;
        m[1][1] = o;
        m[2][2] = u[0][0];
        m[2][3] = u[0][1];
        m[3][2] = u[1][0];
        m[3][3] = u[1][1];
        m
    };
    let diag = |d: [C; 4]| {
        let mut m = [[z; 4]; 4];
        for k in 0..4 {
            m[k][k] = d[k];
        }
        m
    };
    let arg = |k: usize| p.get(k).copied();
    Some(match name {
        "cx" => controlled(pauli(1)),
        "cy" => controlled(pauli(2)),
        "cz" => controlled(pauli(3)),
        "ch" => controlled(one_qubit_matrix("h", &[])?),
        "cp" => diag([o, o, o, C::from_polar(1.0, arg(0)?)]),
        "crz" => {
            let t = arg(0)?;
            diag([o, o, C::from_polar(1.0, -t / 2.0), C::from_polar(1.0, t / 2.0)])
        }
        "rzz" => {
            let t = arg(0)?;
            let (a, b) = (C::from_polar(1.0, -t / 2.0), C::from_polar(1.0, t / 2.0));
            diag([a, b, b, a])
        }
        "rxx" => {
            let (s, co) = (arg(0)? / 2.0).sin_cos();
            let (d, off) = (c(co, 0.0), c(0.0, -s));
            [[d, z, z, off], [z, d, off, z], [z, off, d, z], [off, z, z, d]]
        }
        "swap" => [[o, z, z, z], [z, z, o, z], [z, o, z, z], [z, z, z, o]],
        "iswap" => [[o, z, z, z], [z, z, i, z], [z, i, z, z], [z, z, z, o]],
        "ecr" => {
            let (a, b) = (c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2));
            [[z, a, z, b], [a, z, -b, z], [z, b, z, a], [-b, z, a, z]]
        }
        _ => return None,
    })
}

#[derive(Debug, Clone)]
enum OpKind {
    One(usize, M2),
    Two(usize, usize, M4),
    Measure { qubit: usize, slot: usize },
    Reset(usize),
}

#[derive(Debug, Clone)]
struct Op {
    kind: OpKind,
    qubits: Vec<usize>,
    error: f64,
}

/// Compiled circuit over local qubit indices.
struct Program {
    num_qubits: usize,
    ops: Vec<Op>,
    /// Ops from this index on are terminal measurements.
    tail: usize,
    /// Readout flip probability of the last measurement into each slot.
    flips: Vec<f64>,
}

/// Error pattern of one trajectory: `(op index, Pauli code)` pairs.
type Pattern = Vec<(u32, u8)>;

fn apply_one(state: &mut [C], q: usize, m: &M2) {
    let bit = 1usize << q;
    for base in 0..state.len() {
        if base & bit == 0 {
            let (a0, a1) = (state[base], state[base | bit]);
            state[base] = m[0][0] * a0 + m[0][1] * a1;
            state[base | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn apply_two(state: &mut [C], hi: usize, lo: usize, m: &M4) {
    let (bh, bl) = (1usize << hi, 1usize << lo);
    for base in 0..state.len() {
        if base & (bh | bl) == 0 {
            let idx = [base, base | bl, base | bh, base | bh | bl];
            let a = idx.map(|k| state[k]);
            for (r, &k) in idx.iter().enumerate() {
                state[k] = m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2] + m[r][3] * a[3];
            }
        }
    }
}

struct Branch {
    prob: f64,
    state: Vec<C>,
    bits: usize,
}

/// Split `b` on the Z outcome of local qubit `q`.
fn collapse(b: Branch, q: usize) -> [Option<(Branch, bool)>; 2] {
    let bit = 1usize << q;
    let p1: f64 = b.state.iter().enumerate().filter(|(k, _)| k & bit != 0).map(|(_, a)| a.norm_sqr()).sum();
    let p0 = (1.0 - p1).max(0.0);
    let make = |outcome: bool, p: f64| {
        if p <= 1e-15 {
            return None;
        }
        let norm = 1.0 / p.sqrt();
        let state = b
            .state
            .iter()
            .enumerate()
            .map(|(k, a)| if ((k & bit) != 0) == outcome { a * norm } else { C::new(0.0, 0.0) })
            .collect();
        Some((
            Branch {
                prob: b.prob * p,
                state,
                bits: b.bits,
            },
            outcome,
        ))
    };
    [make(false, p0), make(true, p1)]
}

impl Program {
    fn compile(c: &QuantumCircuit, noise: &NoiseModel) -> Result<Program, NoiseError> {
        let active = c.active_qubits();
        if active.len() > MAX_ACTIVE_QUBITS {
            return Err(NoiseError::TooManyQubits(active.len()));
        }
        let local = |q: usize| active.binary_search(&q).expect("active qubit");
        let mut slots: BTreeMap<usize, usize> = BTreeMap::new();
        for instr in c.instructions().iter().filter(|i| i.kind == InstructionKind::Measure) {
            let next = slots.len();
            slots.entry(instr.clbits[0]).or_insert(next);
        }
        if slots.is_empty() {
            return Err(NoiseError::NoMeasurements);
        }
        if slots.len() > MAX_MEASURED_CLBITS {
            return Err(NoiseError::TooManyClbits(slots.len()));
        }
        let mut flips = vec![0.0; slots.len()];
        let mut ops = Vec::new();
        for instr in c.instructions().iter().filter(|i| !i.is_barrier()) {
            let qs: Vec<usize> = instr.qubits.iter().map(|&q| local(q)).collect();
            let unsupported = || NoiseError::UnsupportedGate {
                name: instr.name.clone(),
                arity: instr.qubits.len(),
            };
            let error = noise.error(&instr.name, &instr.qubits)?;
            let kind = match instr.kind {
                InstructionKind::Measure => {
                    let slot = slots[&instr.clbits[0]];
                    flips[slot] = error;
                    OpKind::Measure { qubit: qs[0], slot }
                }
                InstructionKind::Reset => OpKind::Reset(qs[0]),
                _ => match qs[..] {
                    [q] => OpKind::One(q, one_qubit_matrix(&instr.name, &instr.params).ok_or_else(unsupported)?),
                    [a, b] => OpKind::Two(a, b, two_qubit_matrix(&instr.name, &instr.params).ok_or_else(unsupported)?),
                    _ => return Err(unsupported()),
                },
            };
            ops.push(Op { kind, qubits: qs, error });
        }
        let tail = ops
            .iter()
            .rposition(|op| !matches!(op.kind, OpKind::Measure { .. }))
            .map_or(0, |i| i + 1);
        Ok(Program {
            num_qubits: active.len(),
            ops,
            tail,
            flips,
        })
    }

    fn sample_pattern(&self, rng: &mut ChaCha8Rng) -> Pattern {
        let mut pattern = Pattern::new();
        for (i, op) in self.ops.iter().enumerate() {
            if matches!(op.kind, OpKind::Measure { .. }) || op.error <= 0.0 {
                continue;
            }
            if rng.gen::<f64>() < op.error {
                let code = rng.gen_range(1..4u32.pow(op.qubits.len() as u32));
                pattern.push((i as u32, code as u8));
            }
        }
        pattern
    }

    /// Exact output distribution over measured slots for one error pattern.
    fn distribution(&self, pattern: &Pattern, with_flips: bool) -> Result<Vec<f64>, NoiseError> {
        let mut state = vec![C::new(0.0, 0.0); 1 << self.num_qubits];
        state[0] = C::new(1.0, 0.0);
        let mut branches = vec![Branch { prob: 1.0, state, bits: 0 }];
        let mut errors = pattern.iter().peekable();
        for (i, op) in self.ops[..self.tail].iter().enumerate() {
            match &op.kind {
                OpKind::One(q, m) => branches.iter_mut().for_each(|b| apply_one(&mut b.state, *q, m)),
                OpKind::Two(a, b, m) => branches.iter_mut().for_each(|br| apply_two(&mut br.state, *a, *b, m)),
                OpKind::Measure { qubit, slot } => {
                    let mut next = Vec::new();
                    for b in branches {
                        for (mut nb, outcome) in collapse(b, *qubit).into_iter().flatten() {
                            nb.bits = (nb.bits & !(1 << slot)) | (usize::from(outcome) << slot);
                            next.push(nb);
                        }
                    }
                    branches = next;
                }
                OpKind::Reset(q) => {
                    let mut next = Vec::new();
                    for b in branches {
                        for (mut nb, outcome) in collapse(b, *q).into_iter().flatten() {
                            if outcome {
                                apply_one(&mut nb.state, *q, &pauli(1));
                            }
                            next.push(nb);
                        }
                    }
                    branches = next;
                }
            }
            if branches.len() > MAX_BRANCHES {
                return Err(NoiseError::TooManyBranches);
            }
            while let Some(&&(idx, code)) = errors.peek() {
                if idx as usize != i {
                    break;
                }
                errors.next();
                for (k, &q) in op.qubits.iter().enumerate() {
                    let p = (code >> (2 * k)) & 3;
                    if p != 0 {
                        branches.iter_mut().for_each(|b| apply_one(&mut b.state, q, &pauli(p)));
                    }
                }
            }
        }

        let tail: Vec<(usize, usize)> = self.ops[self.tail..]
            .iter()
            .map(|op| match op.kind {
                OpKind::Measure { qubit, slot } => (qubit, slot),
                _ => unreachable!("tail holds measurements only"),
            })
            .collect();
        let mut dist = vec![0.0; 1 << self.flips.len()];
        for b in &branches {
            for (k, a) in b.state.iter().enumerate() {
                let p = a.norm_sqr();
                if p == 0.0 {
                    continue;
                }
                let mut bits = b.bits;
                for &(q, slot) in &tail {
                    bits = (bits & !(1 << slot)) | (((k >> q) & 1) << slot);
                }
                dist[bits] += b.prob * p;
            }
        }
        if with_flips {
            for (slot, &r) in self.flips.iter().enumerate() {
                if r <= 0.0 {
                    continue;
                }
                let bit = 1 << slot;
                for k in 0..dist.len() {
                    if k & bit == 0 {
                        let (d0, d1) = (dist[k], dist[k | bit]);
                        dist[k] = (1.0 - r) * d0 + r * d1;
                        dist[k | bit] = r * d0 + (1.0 - r) * d1;
                    }
                }
            }
        }
        Ok(dist)
    }
}

/// Ideal output distribution over the circuit's measured classical bits,
/// indexed by measured bits in order of first measurement.
pub fn ideal_distribution(c: &QuantumCircuit) -> Result<Vec<f64>, NoiseError> {
    Program::compile(c, &NoiseModel::noiseless(0))?.distribution(&Pattern::new(), false)
}

/// Estimate the fidelity of `c` (on physical qubits) under `noise`.
///
/// Shot `s` draws from its own ChaCha8 stream `s`, so the result depends only
/// on the seed and the shot count, not on thread scheduling.
pub fn simulate_fidelity(c: &QuantumCircuit, noise: &NoiseModel, shots: u64) -> Result<SimResult, NoiseError> {
    if shots == 0 {
        return Err(NoiseError::ZeroShots);
    }
    let program = Program::compile(c, noise)?;
    let ideal = program.distribution(&Pattern::new(), false)?;

    let patterns: Vec<Pattern> = (0..shots)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            rng.set_stream(s);
            program.sample_pattern(&mut rng)
        })
        .collect();
    let mut counts: BTreeMap<Pattern, u64> = BTreeMap::new();
    for p in patterns {
        *counts.entry(p).or_default() += 1;
    }
    let groups: Vec<(Vec<f64>, f64)> = counts
        .into_par_iter()
        .map(|(p, n)| Ok((program.distribution(&p, true)?, n as f64 / shots as f64)))
        .collect::<Result<_, NoiseError>>()?;

    let mut noisy = vec![0.0; ideal.len()];
    for (dist, w) in &groups {
        for (acc, d) in noisy.iter_mut().zip(dist) {
            *acc += w * d;
        }
    }
    if noisy == ideal {
        return Ok(SimResult {
            fidelity: 1.0,
            stderr: 0.0,
            shots,
        });
    }
    let fidelity: f64 = noisy.iter().zip(&ideal).map(|(p, q)| (p * q).sqrt()).sum::<f64>().clamp(0.0, 1.0);
    // Linearise the overlap around the mean distribution: g_i = sqrt(q_i / p_i) / 2.
    let g: Vec<f64> = noisy
        .iter()
        .zip(&ideal)
        .map(|(&p, &q)| if p > 0.0 { (q / p).sqrt() / 2.0 } else { 0.0 })
        .collect();
    let (mut mean, mut sq) = (0.0, 0.0);
    for (dist, w) in &groups {
        let x: f64 = dist.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        mean += w * x;
        sq += w * x * x;
    }
    let stderr = ((sq - mean * mean).max(0.0) / shots as f64).sqrt();
    Ok(SimResult {
        fidelity,
        stderr,
        shots,
    })
}
