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

//! Test-side oracles. Nothing here calls into the search or scoring code,
//! so agreement with the library is a genuine cross-check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use laymat::calibration::ErrorMap;
use laymat::circuit::{Instruction, QuantumCircuit};
use laymat::interaction::MatchMode;
use laymat::subiso::Layout;
use laymat::topology::{CouplingMap, SupportedOps};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The 7-qubit Nairobi map, typed in by hand: 0-1, 1-2, 1-3, 3-5, 4-5, 5-6.
pub fn nairobi() -> CouplingMap {
    let undirected = [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)];
    let edges: Vec<(usize, usize)> = undirected.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
    CouplingMap::new(7, edges).unwrap()
}

/// Every injective map from the active qubits of `c` into `target` that
/// carries each two-qubit instruction onto an edge. Strict mode wants the
/// exact orientation and every instruction to be supported where it lands.
pub fn brute_force_embeddings(c: &QuantumCircuit, target: &CouplingMap, mode: MatchMode) -> BTreeSet<Layout> {
    let active: Vec<usize> = {
        let mut s = BTreeSet::new();
        for i in c.instructions().iter().filter(|i| !i.is_barrier()) {
            s.extend(i.qubits.iter().copied());
        }
        s.into_iter().collect()
    };
    let mut out = BTreeSet::new();
    let mut image = vec![None; c.num_qubits()];
    let mut used = vec![false; target.num_qubits()];
    extend(c, target, mode, &active, 0, &mut image, &mut used, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn extend(
    c: &QuantumCircuit,
    target: &CouplingMap,
    mode: MatchMode,
    active: &[usize],
    k: usize,
    image: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    out: &mut BTreeSet<Layout>,
) {
    if k == active.len() {
        if admissible(c, target, mode, image) {
            out.insert(Layout::new(image.clone()));
        }
        return;
    }
    for p in 0..target.num_qubits() {
        if used[p] {
            continue;
        }
        used[p] = true;
        image[active[k]] = Some(p);
        extend(c, target, mode, active, k + 1, image, used, out);
        image[active[k]] = None;
        used[p] = false;
    }
}

fn admissible(c: &QuantumCircuit, target: &CouplingMap, mode: MatchMode, image: &[Option<usize>]) -> bool {
    let edges: BTreeSet<(usize, usize)> = target.edges().collect();
    c.instructions().iter().filter(|i| !i.is_barrier()).all(|i| {
        let phys: Vec<usize> = i.qubits.iter().map(|&q| image[q].unwrap()).collect();
        let placed = match phys.as_slice() {
            [a, b] => match mode {
                MatchMode::Strict => edges.contains(&(*a, *b)),
                MatchMode::Loose => edges.contains(&(*a, *b)) || edges.contains(&(*b, *a)),
            },
            _ => true,
        };
        let available = match (mode, target.supported_ops()) {
            (MatchMode::Strict, Some(ops)) if phys.len() <= 2 => {
                ops.get(&i.name).is_some_and(|locs| locs.contains(&phys))
            }
            _ => true,
        };
        placed && available
    })
}

/// The reference estimate: one product over the instruction list.
pub fn reference_score(c: &QuantumCircuit, layout: &Layout, em: &ErrorMap) -> f64 {
    1.0 - c
        .instructions()
        .iter()
        .filter(|i| !i.is_barrier())
        .map(|i| 1.0 - em.error(&i.name, &layout.map_qubits(&i.qubits).unwrap()).unwrap())
        .product::<f64>()
}

/// Lowest reference score over `layouts`, ties within `tol` broken by the
/// lexicographically smallest layout.
pub fn exhaustive_optimum(
    c: &QuantumCircuit,
    layouts: &BTreeSet<Layout>,
    em: &ErrorMap,
    tol: f64,
) -> Option<(Layout, f64)> {
    let scored: Vec<(Layout, f64)> = layouts.iter().map(|l| (l.clone(), reference_score(c, l, em))).collect();
    let min = scored.iter().map(|(_, s)| *s).fold(f64::INFINITY, f64::min);
    scored.into_iter().filter(|(_, s)| *s <= min + tol).min_by(|a, b| a.0.cmp(&b.0))
}

/// Ranks with ties sharing their average position.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho as the Pearson correlation of average ranks.
/// `None` when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Idle error by integrating the free Bloch equations with RK4. Coherence
/// survival is read off from +x and +y, population survival from an
/// excited start, and the three are averaged.
pub fn idle_error_rk4(t1: f64, t2: f64, dt: f64) -> f64 {
    let t2 = t2.min(2.0 * t1);
    let steps = 4000;
    let h = dt / steps as f64;
    let deriv = |v: [f64; 3]| [-v[0] / t2, -v[1] / t2, (1.0 - v[2]) / t1];
    let evolve = |mut v: [f64; 3]| {
        for _ in 0..steps {
            let k1 = deriv(v);
            let k2 = deriv(add(v, k1, h / 2.0));
            let k3 = deriv(add(v, k2, h / 2.0));
            let k4 = deriv(add(v, k3, h));
            for i in 0..3 {
                v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        v
    };
    let sx = evolve([1.0, 0.0, 0.0])[0];
    let sy = evolve([0.0, 1.0, 0.0])[1];
    let sz = (1.0 - evolve([0.0, 0.0, -1.0])[2]) / 2.0;
    1.0 - (sx + sy + sz) / 3.0
}

fn add(v: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [v[0] + h * k[0], v[1] + h * k[1], v[2] + h * k[2]]
}

/// Random directed graph on `n` nodes. With `ops`, a random subset of edges
/// and nodes advertises cx / x.
pub fn random_target(rng: &mut ChaCha8Rng, n: usize, density: f64, ops: bool) -> CouplingMap {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    if !ops {
        return CouplingMap::new(n, edges).unwrap();
    }
    let mut supported = SupportedOps::new();
    for &(a, b) in &edges {
        if rng.gen_bool(0.8) {
            supported.entry("cx".into()).or_default().insert(vec![a, b]);
        }
    }
    for q in 0..n {
        if rng.gen_bool(0.8) {
            supported.entry("x".into()).or_default().insert(vec![q]);
        }
    }
    CouplingMap::with_supported_ops(n, edges, Some(supported)).unwrap()
}

/// Random circuit over `n` virtual qubits built from cx and x, with some
/// idle wires and an occasional barrier.
pub fn random_pattern(rng: &mut ChaCha8Rng, n: usize, gates: usize) -> QuantumCircuit {
    let mut c = QuantumCircuit::new(n, 0);
    let live: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.85)).collect();
    for _ in 0..gates {
        if live.len() >= 2 && rng.gen_bool(0.7) {
            let pair: Vec<usize> = live.choose_multiple(rng, 2).copied().collect();
            c.gate("cx", &pair, &[]).unwrap();
        } else if let Some(&q) = live.choose(rng) {
            c.gate("x", &[q], &[]).unwrap();
        }
        if rng.gen_bool(0.1) {
            c.push(Instruction::barrier(&(0..n).collect::<Vec<_>>())).unwrap();
        }
    }
    c
}

/// Random circuit with assorted one- and two-qubit gates, measurements and
/// barriers, used for scoring checks.
pub fn random_scored_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize) -> QuantumCircuit {
    let one = ["x", "sx", "rz", "h", "id"];
    let mut c = QuantumCircuit::new(n, n);
    for _ in 0..len {
        match rng.gen_range(0..10) {
            0..=4 => {
                let name = one.choose(rng).unwrap();
                let params: Vec<f64> = if *name == "rz" { vec![rng.gen_range(-3.0..3.0)] } else { vec![] };
                c.gate(name, &[rng.gen_range(0..n)], &params).unwrap();
            }
            5..=7 if n >= 2 => {
                let pair: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(rng, 2).copied().collect();
                c.gate("cx", &pair, &[]).unwrap();
            }
            8 => {
                let q = rng.gen_range(0..n);
                c.push(Instruction::measure(q, q)).unwrap();
            }
            _ => c.push(Instruction::barrier(&(0..n).collect::<Vec<_>>())).unwrap(),
        }
    }
    c
}

/// All two-qubit instruction pairs mapped through `layout` sit on edges of `cm`.
pub fn edges_respected(c: &QuantumCircuit, layout: &Layout, cm: &CouplingMap) -> bool {
    let und = cm.undirected_edges();
    c.instructions().iter().filter(|i| i.qubits.len() == 2 && !i.is_barrier()).all(|i| {
        let p = layout.map_qubits(&i.qubits).unwrap();
        und.contains(&(p[0].min(p[1]), p[0].max(p[1])))
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Op counts of a circuit keyed by (name, qubits), for remap checks.
pub fn op_multiset(c: &QuantumCircuit) -> BTreeMap<(String, Vec<usize>), usize> {
    let mut m = BTreeMap::new();
    for i in c.instructions() {
        *m.entry((i.name.clone(), i.qubits.clone())).or_default() += 1;
    }
    m
}
