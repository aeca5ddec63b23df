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

//! Layout scoring: the fidelity-product cost, its idle-aware variant, and ranking.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{idle_error, CalibrationError, CalibrationSnapshot, ErrorMap};
use crate::circuit::QuantumCircuit;
use crate::subiso::Layout;

/// Default tolerance for treating two scores as tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("layout does not place virtual qubit {0}")]
    Unplaced(usize),
    #[error("layout has {layout} entries, circuit has {circuit} qubits")]
    SizeMismatch { layout: usize, circuit: usize },
    #[error("fidelity {0} is outside [0, 1]")]
    FidelityOutOfRange(f64),
    #[error("baseline fidelity is 1; nothing is recoverable")]
    PerfectBaseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredLayout {
    pub layout: Layout,
    /// Estimated error, lower is better.
    pub score: f64,
    pub fidelity_estimate: f64,
    /// Size of the tie group this layout belongs to (1 when unique).
    pub tied_with: usize,
}

fn physical(c: &QuantumCircuit, layout: &Layout, qubits: &[usize]) -> Result<Vec<usize>, ScoreError> {
    if layout.len() != c.num_qubits() {
        return Err(ScoreError::SizeMismatch {
            layout: layout.len(),
            circuit: c.num_qubits(),
        });
    }
    qubits
        .iter()
        .map(|&q| layout.get(q).ok_or(ScoreError::Unplaced(q)))
        .collect()
}

/// `1 - prod(1 - e_i)` over the non-barrier instructions, with each `e_i`
/// looked up at the instruction's physical image. Measurements use readout error.
pub fn score_default(c: &QuantumCircuit, layout: &Layout, em: &ErrorMap) -> Result<f64, ScoreError> {
    let mut fidelity = 1.0;
    for instr in c.instructions().iter().filter(|i| !i.is_barrier()) {
        let phys = physical(c, layout, &instr.qubits)?;
        fidelity *= 1.0 - em.error(&instr.name, &phys)?;
    }
    Ok(1.0 - fidelity)
}

/// Idle gaps of an as-soon-as-possible schedule: `(virtual qubit, gap seconds)`
/// for every positive gap between consecutive instructions on a qubit.
pub fn idle_gaps(c: &QuantumCircuit, layout: &Layout, em: &ErrorMap) -> Result<Vec<(usize, f64)>, ScoreError> {
    // Scheduled in nanoseconds so calibrated durations add up exactly.
    let mut end: Vec<Option<f64>> = vec![None; c.num_qubits()];
    let mut gaps = Vec::new();
    for instr in c.instructions().iter().filter(|i| !i.is_barrier()) {
        let phys = physical(c, layout, &instr.qubits)?;
        let duration = em.duration_ns(&instr.name, &phys)?;
        let start = instr
            .qubits
            .iter()
            .filter_map(|&q| end[q])
            .fold(0.0, f64::max);
        for &q in &instr.qubits {
            if let Some(prev) = end[q] {
                if start > prev {
                    gaps.push((q, (start - prev) * 1e-9));
                }
            }
            end[q] = Some(start + duration);
        }
    }
    Ok(gaps)
}

/// [`score_default`] with an extra `1 - idle_error(t1, t2, gap)` factor for each idle gap.
pub fn score_with_idle(
    c: &QuantumCircuit,
    layout: &Layout,
    em: &ErrorMap,
    snap: &CalibrationSnapshot,
) -> Result<f64, ScoreError> {
    let base = score_default(c, layout, em)?;
    let gaps = idle_gaps(c, layout, em)?;
    if gaps.is_empty() {
        return Ok(base);
    }
    let mut fidelity = 1.0 - base;
    for (q, gap) in gaps {
        let p = layout.get(q).ok_or(ScoreError::Unplaced(q))?;
        let props = snap.qubits.get(p).ok_or(CalibrationError::Missing {
            name: "qubit".into(),
            qubits: vec![p],
        })?;
        fidelity *= 1.0 - idle_error(props.t1(), props.t2(), gap)?;
    }
    Ok(1.0 - fidelity)
}

/// A named scoring rule. Scores must lie in `[0, 1]` and be deterministic.
pub trait CostFunction: Sync {
    fn name(&self) -> &str;
    fn score(
        &self,
        c: &QuantumCircuit,
        layout: &Layout,
        em: &ErrorMap,
        snap: &CalibrationSnapshot,
    ) -> Result<f64, ScoreError>;
}

/// Built-in cost functions, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    #[default]
    Default,
    Idle,
}

impl CostFunction for CostKind {
    fn name(&self) -> &str {
        match self {
            CostKind::Default => "default",
            CostKind::Idle => "idle",
        }
    }

    fn score(
        &self,
        c: &QuantumCircuit,
        layout: &Layout,
        em: &ErrorMap,
        snap: &CalibrationSnapshot,
    ) -> Result<f64, ScoreError> {
        match self {
            CostKind::Default => score_default(c, layout, em),
            CostKind::Idle => score_with_idle(c, layout, em, snap),
        }
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Score every layout and sort ascending.
///
/// Consecutive scores within `tol` of a group's first score form a tie group;
/// each group is ordered by physical tuple and every member records the group
/// size. Scoring runs in parallel; the result does not depend on scheduling.
pub fn rank_layouts(
    c: &QuantumCircuit,
    layouts: &[Layout],
    cost: &dyn CostFunction,
    em: &ErrorMap,
    snap: &CalibrationSnapshot,
    tol: f64,
) -> Result<Vec<ScoredLayout>, ScoreError> {
    let scores: Vec<f64> = layouts
        .par_iter()
        .map(|l| cost.score(c, l, em, snap))
        .collect::<Result<_, _>>()?;
    let mut order: Vec<usize> = (0..layouts.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then_with(|| layouts[a].cmp(&layouts[b])));

    let mut ranked = Vec::with_capacity(layouts.len());
    let mut i = 0;
    while i < order.len() {
        let head = scores[order[i]];
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] - head <= tol {
            j += 1;
        }
        let mut group: Vec<usize> = order[i..j].to_vec();
        group.sort_by(|&a, &b| layouts[a].cmp(&layouts[b]));
        for idx in group {
            ranked.push(ScoredLayout {
                layout: layouts[idx].clone(),
                score: scores[idx],
                fidelity_estimate: 1.0 - scores[idx],
                tied_with: j - i,
            });
        }
        i = j;
    }
    Ok(ranked)
}

/// Share of the baseline's missing fidelity regained: `(f - f_base) / (1 - f_base)`.
/// Negative when `f` is worse than the baseline.
pub fn recoverable_fraction(f: f64, f_base: f64) -> Result<f64, ScoreError> {
    for v in [f, f_base] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ScoreError::FidelityOutOfRange(v));
        }
    }
    if f_base == 1.0 {
        return Err(ScoreError::PerfectBaseline);
    }
    Ok((f - f_base) / (1.0 - f_base))
}
