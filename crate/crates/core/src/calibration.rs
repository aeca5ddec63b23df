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

//! Calibration snapshots, error maps and synthetic calibration profiles.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interaction::MatchMode;
use crate::topology::CouplingMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("invalid calibration JSON: {0}")]
    Json(String),
    #[error("{field} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { field: String, value: f64 },
    #[error("{field} = {value} must be positive")]
    NonPositive { field: String, value: f64 },
    #[error("{field} = {value} must be non-negative")]
    Negative { field: String, value: f64 },
    #[error("gate '{name}' references qubit {qubit}, device has {size}")]
    UnknownQubit { name: String, qubit: usize, size: usize },
    #[error("gate '{name}' on {qubits:?} must act on 1 or 2 distinct qubits")]
    BadGateQubits { name: String, qubits: Vec<usize> },
    #[error("duplicate calibration entry for '{name}' on {qubits:?}")]
    Duplicate { name: String, qubits: Vec<usize> },
    #[error("no calibration entry for '{name}' on {qubits:?}")]
    Missing { name: String, qubits: Vec<usize> },
    #[error("no duration for '{name}' on {qubits:?}")]
    MissingDuration { name: String, qubits: Vec<usize> },
    #[error("calibration covers {found} qubits, coupling map has {expected}")]
    SizeMismatch { found: usize, expected: usize },
    #[error("gate '{name}' on {qubits:?} is not on a coupling-map edge")]
    OffMap { name: String, qubits: Vec<usize> },
}

/// Per-qubit data, stored in the units of the JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitProps {
    pub t1_us: f64,
    pub t2_us: f64,
    pub readout_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_duration_ns: Option<f64>,
}

impl QubitProps {
    /// T1 in seconds.
    pub fn t1(&self) -> f64 {
        self.t1_us * 1e-6
    }

    /// T2 in seconds.
    pub fn t2(&self) -> f64 {
        self.t2_us * 1e-6
    }

    /// Measurement duration in seconds, if calibrated.
    pub fn readout_duration(&self) -> Option<f64> {
        self.readout_duration_ns.map(|d| d * 1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateProps {
    pub name: String,
    pub qubits: Vec<usize>,
    pub error: f64,
    pub duration_ns: f64,
}

impl GateProps {
    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.duration_ns * 1e-9
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSnapshot {
    pub device_name: String,
    /// Carried through untouched.
    pub timestamp: String,
    pub qubits: Vec<QubitProps>,
    pub gates: Vec<GateProps>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQubit {
    t1_us: f64,
    t2_us: f64,
    #[serde(default)]
    readout_error: Option<f64>,
    #[serde(default)]
    readout_duration_ns: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSnapshot {
    device: String,
    #[serde(default)]
    timestamp: String,
    qubits: Vec<RawQubit>,
    #[serde(default)]
    gates: Vec<GateProps>,
}

#[derive(Serialize)]
struct RawSnapshotOut<'a> {
    device: &'a str,
    timestamp: &'a str,
    qubits: &'a [QubitProps],
    gates: &'a [GateProps],
}

fn check_probability(field: impl FnOnce() -> String, value: f64) -> Result<(), CalibrationError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(CalibrationError::ProbabilityOutOfRange { field: field(), value })
    }
}

fn check_positive(field: impl FnOnce() -> String, value: f64) -> Result<(), CalibrationError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CalibrationError::NonPositive { field: field(), value })
    }
}

fn check_non_negative(field: impl FnOnce() -> String, value: f64) -> Result<(), CalibrationError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CalibrationError::Negative { field: field(), value })
    }
}

/// Parse calibration JSON. Missing readout errors take the mean of the given ones.
pub fn load_calibration(json: &str) -> Result<CalibrationSnapshot, CalibrationError> {
    let value: serde_json::Value = serde_json::from_str(json).map_err(|e| CalibrationError::Json(e.to_string()))?;
    CalibrationSnapshot::from_value(value)
}

impl CalibrationSnapshot {
    pub(crate) fn from_value(value: serde_json::Value) -> Result<Self, CalibrationError> {
        let raw: RawSnapshot = serde_json::from_value(value).map_err(|e| CalibrationError::Json(e.to_string()))?;
        let given: Vec<f64> = raw.qubits.iter().filter_map(|q| q.readout_error).collect();
        for (i, &r) in raw.qubits.iter().filter_map(|q| q.readout_error.as_ref()).enumerate() {
            check_probability(|| format!("qubits[{i}].readout_error"), r)?;
        }
        let default_readout = if given.is_empty() {
            0.0
        } else {
            given.iter().sum::<f64>() / given.len() as f64
        };
        let snap = CalibrationSnapshot {
            device_name: raw.device,
            timestamp: raw.timestamp,
            qubits: raw
                .qubits
                .into_iter()
                .map(|q| QubitProps {
                    t1_us: q.t1_us,
                    t2_us: q.t2_us,
                    readout_error: q.readout_error.unwrap_or(default_readout),
                    readout_duration_ns: q.readout_duration_ns,
                })
                .collect(),
            gates: raw.gates,
        };
        snap.validate()?;
        Ok(snap)
    }

    /// Range and consistency checks applied on load.
    pub fn validate(&self) -> Result<(), CalibrationError> {
        for (i, q) in self.qubits.iter().enumerate() {
            check_positive(|| format!("qubits[{i}].t1_us"), q.t1_us)?;
            check_positive(|| format!("qubits[{i}].t2_us"), q.t2_us)?;
            check_probability(|| format!("qubits[{i}].readout_error"), q.readout_error)?;
            if let Some(d) = q.readout_duration_ns {
                check_non_negative(|| format!("qubits[{i}].readout_duration_ns"), d)?;
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (i, g) in self.gates.iter().enumerate() {
            let distinct = match g.qubits.as_slice() {
                [_] => true,
                [a, b] => a != b,
                _ => false,
            };
            if !distinct {
                return Err(CalibrationError::BadGateQubits {
                    name: g.name.clone(),
                    qubits: g.qubits.clone(),
                });
            }
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= self.qubits.len()) {
                return Err(CalibrationError::UnknownQubit {
                    name: g.name.clone(),
                    qubit: q,
                    size: self.qubits.len(),
                });
            }
            check_probability(|| format!("gates[{i}].error"), g.error)?;
            check_non_negative(|| format!("gates[{i}].duration_ns"), g.duration_ns)?;
            if !seen.insert((g.name.as_str(), g.qubits.as_slice())) {
                return Err(CalibrationError::Duplicate {
                    name: g.name.clone(),
                    qubits: g.qubits.clone(),
                });
            }
        }
        Ok(())
    }

    /// Soft findings that do not block loading, such as T2 > 2*T1.
    pub fn warnings(&self) -> Vec<String> {
        self.qubits
            .iter()
            .enumerate()
            .filter(|(_, q)| q.t2_us > 2.0 * q.t1_us)
            .map(|(i, q)| format!("qubit {i}: t2 ({} us) exceeds 2*t1 ({} us)", q.t2_us, 2.0 * q.t1_us))
            .collect()
    }

    /// Check that the snapshot describes `cm`: same qubit count, two-qubit entries on edges.
    pub fn check_against(&self, cm: &CouplingMap) -> Result<(), CalibrationError> {
        if self.qubits.len() != cm.num_qubits() {
            return Err(CalibrationError::SizeMismatch {
                found: self.qubits.len(),
                expected: cm.num_qubits(),
            });
        }
        for g in &self.gates {
            if let [a, b] = g.qubits[..] {
                if !cm.has_edge(a, b) && !cm.has_edge(b, a) {
                    return Err(CalibrationError::OffMap {
                        name: g.name.clone(),
                        qubits: g.qubits.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("calibration JSON is always serializable")
    }

    pub(crate) fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(RawSnapshotOut {
            device: &self.device_name,
            timestamp: &self.timestamp,
            qubits: &self.qubits,
            gates: &self.gates,
        })
        .expect("calibration JSON is always serializable")
    }
}

/// Physical location key: one qubit is `(q, NO_QUBIT)`.
type Loc = (usize, usize);
const NO_QUBIT: usize = usize::MAX;

fn loc_of(qubits: &[usize]) -> Option<Loc> {
    match *qubits {
        [q] => Some((q, NO_QUBIT)),
        [a, b] => Some((a, b)),
        _ => None,
    }
}

fn undirected(loc: Loc) -> Loc {
    if loc.1 == NO_QUBIT {
        loc
    } else {
        (loc.0.min(loc.1), loc.0.max(loc.1))
    }
}

/// Instruction error lookups derived from a snapshot.
///
/// Strict maps answer exact `(name, qubits)` queries and fail on misses.
/// Loose maps ignore the instruction name and orientation: a query returns the
/// mean error of everything calibrated on that qubit or pair, falling back to
/// the device-wide mean for the arity. Measurements always use the qubit's
/// readout error. Durations follow the same rules and are kept in nanoseconds.
#[derive(Debug, Clone)]
pub struct ErrorMap {
    mode: MatchMode,
    names: HashMap<String, usize>,
    exact: HashMap<(usize, Loc), (f64, f64)>,
    site_error: HashMap<Loc, f64>,
    name_duration: HashMap<(usize, usize), f64>,
    readout: Vec<f64>,
    readout_duration: Vec<Option<f64>>,
    mean_readout_duration: Option<f64>,
    averages: BTreeMap<usize, f64>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Build the error map of `snapshot` for `mode`.
pub fn error_map(snapshot: &CalibrationSnapshot, mode: MatchMode) -> ErrorMap {
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut exact = HashMap::new();
    let mut per_site: BTreeMap<Loc, Vec<f64>> = BTreeMap::new();
    let mut per_arity: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut per_name: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for g in &snapshot.gates {
        let Some(loc) = loc_of(&g.qubits) else { continue };
        let next = names.len();
        let id = *names.entry(g.name.clone()).or_insert(next);
        exact.insert((id, loc), (g.error, g.duration_ns));
        per_site.entry(undirected(loc)).or_default().push(g.error);
        per_arity.entry(g.qubits.len()).or_default().push(g.error);
        per_name.entry((id, g.qubits.len())).or_default().push(g.duration_ns);
    }
    let durations: Vec<f64> = snapshot.qubits.iter().filter_map(|q| q.readout_duration_ns).collect();
    ErrorMap {
        mode,
        names,
        exact,
        site_error: per_site.into_iter().map(|(k, v)| (k, mean(&v))).collect(),
        name_duration: per_name.into_iter().map(|(k, v)| (k, mean(&v))).collect(),
        readout: snapshot.qubits.iter().map(|q| q.readout_error).collect(),
        readout_duration: snapshot.qubits.iter().map(|q| q.readout_duration_ns).collect(),
        mean_readout_duration: (!durations.is_empty()).then(|| mean(&durations)),
        averages: per_arity.into_iter().map(|(k, v)| (k, mean(&v))).collect(),
    }
}

impl ErrorMap {
    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    /// Mean error of all gate entries, by arity.
    pub fn averages(&self) -> &BTreeMap<usize, f64> {
        &self.averages
    }

    pub fn num_qubits(&self) -> usize {
        self.readout.len()
    }

    pub fn readout_error(&self, q: usize) -> Option<f64> {
        self.readout.get(q).copied()
    }

    fn missing(name: &str, qubits: &[usize]) -> CalibrationError {
        CalibrationError::Missing {
            name: name.to_string(),
            qubits: qubits.to_vec(),
        }
    }

    /// Error probability of `name` on physical `qubits`.
    pub fn error(&self, name: &str, qubits: &[usize]) -> Result<f64, CalibrationError> {
        if qubits.iter().any(|&q| q >= self.readout.len()) {
            return Err(Self::missing(name, qubits));
        }
        if name == "measure" {
            return match qubits {
                [q] => Ok(self.readout[*q]),
                _ => Err(Self::missing(name, qubits)),
            };
        }
        let loc = loc_of(qubits).ok_or_else(|| Self::missing(name, qubits))?;
        match self.mode {
            MatchMode::Strict => self
                .names
                .get(name)
                .and_then(|&id| self.exact.get(&(id, loc)))
                .map(|&(e, _)| e)
                .ok_or_else(|| Self::missing(name, qubits)),
            MatchMode::Loose => Ok(self
                .site_error
                .get(&undirected(loc))
                .or_else(|| self.averages.get(&qubits.len()))
                .copied()
                .unwrap_or(0.0)),
        }
    }

    /// Duration in seconds of `name` on physical `qubits`.
    pub fn duration(&self, name: &str, qubits: &[usize]) -> Result<f64, CalibrationError> {
        Ok(self.duration_ns(name, qubits)? * 1e-9)
    }

    /// Duration in nanoseconds, as calibrated.
    pub fn duration_ns(&self, name: &str, qubits: &[usize]) -> Result<f64, CalibrationError> {
        let missing = || CalibrationError::MissingDuration {
            name: name.to_string(),
            qubits: qubits.to_vec(),
        };
        if qubits.iter().any(|&q| q >= self.readout.len()) {
            return Err(missing());
        }
        if name == "measure" {
            let [q] = qubits else { return Err(missing()) };
            return match self.mode {
                MatchMode::Strict => self.readout_duration[*q].ok_or_else(missing),
                MatchMode::Loose => self.readout_duration[*q].or(self.mean_readout_duration).ok_or_else(missing),
            };
        }
        let loc = loc_of(qubits).ok_or_else(missing)?;
        let id = *self.names.get(name).ok_or_else(missing)?;
        if let Some(&(_, d)) = self.exact.get(&(id, loc)) {
            return Ok(d);
        }
        match self.mode {
            MatchMode::Strict => Err(missing()),
            MatchMode::Loose => self
                .exact
                .get(&(id, (loc.1, loc.0)))
                .filter(|_| loc.1 != NO_QUBIT)
                .map(|&(_, d)| d)
                .or_else(|| self.name_duration.get(&(id, qubits.len())).copied())
                .ok_or_else(missing),
        }
    }
}

/// Average error of an idle interval `dt` under T1/T2 decay:
/// `1 - (exp(-dt/t1) + 2 exp(-dt/t2')) / 3` with `t2' = min(t2, 2 t1)`.
///
/// All arguments in seconds. `dt = 0` gives 0.
pub fn idle_error(t1: f64, t2: f64, dt: f64) -> Result<f64, CalibrationError> {
    check_positive(|| "t1".into(), t1)?;
    check_positive(|| "t2".into(), t2)?;
    if dt.is_nan() || dt < 0.0 {
        return Err(CalibrationError::Negative { field: "dt".into(), value: dt });
    }
    let t2 = t2.min(2.0 * t1);
    let survive = ((-dt / t1).exp() + 2.0 * (-dt / t2).exp()) / 3.0;
    Ok((1.0 - survive).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Identical values everywhere.
    Uniform,
    /// Errors grow with qubit index; qubit 0's corner is best.
    Gradient,
    /// Uniform-ish background with one bad edge.
    Hotspot,
}

/// Single-qubit basis calibrated on every qubit of a synthetic device.
pub const SYNTH_BASIS: [&str; 6] = ["id", "x", "sx", "sxdg", "rz", "h"];

const BASE_1Q: f64 = 3e-4;
const BASE_2Q: f64 = 8e-3;
const BASE_READOUT: f64 = 1.5e-2;
const BASE_T1_US: f64 = 120.0;
const HOTSPOT_ERROR: f64 = 0.25;

/// Deterministic synthetic calibration for `cm`.
///
/// Every qubit gets the single-qubit basis plus `reset`, every directed edge a
/// `cx`, and every qubit a readout error and duration.
pub fn synth_calibration(cm: &CouplingMap, seed: u64, profile: Profile) -> CalibrationSnapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cm.num_qubits();
    let span = n.saturating_sub(1).max(1) as f64;
    // Error multiplier at position x in [0, n-1]: 1 at qubit 0, 16 at the far end.
    let scale = |x: f64| match profile {
        Profile::Gradient => (16f64.ln() * x / span).exp(),
        _ => 1.0,
    };
    let jitter = |rng: &mut ChaCha8Rng| match profile {
        Profile::Uniform => 1.0,
        _ => rng.gen_range(0.95..1.05),
    };

    let mut qubits = Vec::with_capacity(n);
    for q in 0..n {
        let s = scale(q as f64);
        let t1 = BASE_T1_US / s.sqrt() * jitter(&mut rng);
        qubits.push(QubitProps {
            t1_us: t1,
            t2_us: 0.8 * t1,
            readout_error: (BASE_READOUT * s * jitter(&mut rng)).min(1.0),
            readout_duration_ns: Some(800.0),
        });
    }

    let mut gates = Vec::new();
    for q in 0..n {
        let s = scale(q as f64);
        let e1 = (BASE_1Q * s * jitter(&mut rng)).min(1.0);
        for name in SYNTH_BASIS {
            let duration_ns = if name == "rz" { 0.0 } else { 35.5 };
            gates.push(GateProps {
                name: name.to_string(),
                qubits: vec![q],
                error: e1,
                duration_ns,
            });
        }
        gates.push(GateProps {
            name: "reset".into(),
            qubits: vec![q],
            error: e1,
            duration_ns: 1000.0,
        });
    }

    let undirected: Vec<(usize, usize)> = cm.undirected_edges().into_iter().collect();
    let hot = match profile {
        Profile::Hotspot if !undirected.is_empty() => Some(undirected[rng.gen_range(0..undirected.len())]),
        _ => None,
    };
    for (a, b) in undirected {
        let s = scale((a + b) as f64 / 2.0);
        let e2 = if hot == Some((a, b)) {
            HOTSPOT_ERROR
        } else {
            (BASE_2Q * s * jitter(&mut rng)).min(HOTSPOT_ERROR / 2.0)
        };
        let duration_ns = 300.0 + 20.0 * ((a + b) % 7) as f64;
        for (x, y) in [(a, b), (b, a)] {
            if cm.has_edge(x, y) {
                gates.push(GateProps {
                    name: "cx".into(),
                    qubits: vec![x, y],
                    error: e2,
                    duration_ns,
                });
            }
        }
    }

    let name = match profile {
        Profile::Uniform => "uniform",
        Profile::Gradient => "gradient",
        Profile::Hotspot => "hotspot",
    };
    CalibrationSnapshot {
        device_name: format!("synth-{name}-{seed}"),
        timestamp: "1970-01-01T00:00:00Z".into(),
        qubits,
        gates,
    }
}
