use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-qubit calibration record. Frequencies in GHz, coherence times in
/// microseconds, durations in nanoseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub id: usize,
    #[serde(rename = "frequency_ghz")]
    pub frequency: f64,
    /// ω12 − ω01, negative for transmons.
    #[serde(rename = "anharmonicity_ghz")]
    pub anharmonicity: f64,
    #[serde(rename = "t1_us")]
    pub t1: f64,
    #[serde(rename = "t2_us")]
    pub t2: f64,
    pub readout_p0_given_1: f64,
    pub readout_p1_given_0: f64,
    pub sq_error: f64,
    #[serde(rename = "sq_duration_ns")]
    pub sq_duration: f64,
}

impl QubitCalibration {
    /// ω12 = ω01 + anharmonicity.
    pub fn frequency_12(&self) -> f64 {
        self.frequency + self.anharmonicity
    }
}

/// Calibrated coupler. `drive` is the qubit that receives the
/// cross-resonance pulse of the native CNOT, `target` the other one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCalibration {
    pub drive: usize,
    pub target: usize,
    pub cx_error: f64,
    #[serde(rename = "cx_duration_ns")]
    pub cx_duration: f64,
}

/// Validated device description. Construct through [`DeviceSnapshot::new`]
/// or [`load_snapshot`]; both check every invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceSnapshot {
    pub name: String,
    pub timestamp: String,
    pub qubits: Vec<QubitCalibration>,
    pub edges: Vec<EdgeCalibration>,
    #[serde(skip)]
    index: BTreeMap<usize, usize>,
    #[serde(skip)]
    adjacency: BTreeMap<usize, BTreeSet<usize>>,
}

#[derive(Deserialize)]
struct RawSnapshot {
    #[serde(default)]
    name: String,
    #[serde(default)]
    timestamp: String,
    qubits: Vec<QubitCalibration>,
    #[serde(default)]
    edges: Vec<EdgeCalibration>,
}

impl<'de> Deserialize<'de> for DeviceSnapshot {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSnapshot::deserialize(d)?;
        DeviceSnapshot::new(raw.name, raw.timestamp, raw.qubits, raw.edges)
            .map_err(serde::de::Error::custom)
    }
}

fn check_probability(field: String, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::invariant(
            field,
            format!("{value} is not a probability"),
        ));
    }
    Ok(())
}

impl DeviceSnapshot {
    pub fn new(
        name: impl Into<String>,
        timestamp: impl Into<String>,
        qubits: Vec<QubitCalibration>,
        edges: Vec<EdgeCalibration>,
    ) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::invariant("qubits", "qubit list is empty"));
        }
        let mut index = BTreeMap::new();
        for (pos, q) in qubits.iter().enumerate() {
            let f = |name: &str| format!("qubits[{pos}].{name}");
            if index.insert(q.id, pos).is_some() {
                return Err(Error::invariant(
                    f("id"),
                    format!("duplicate qubit id {}", q.id),
                ));
            }
            if !q.frequency.is_finite() || q.frequency <= 0.0 {
                return Err(Error::invariant(
                    f("frequency_ghz"),
                    "must be positive and finite",
                ));
            }
            if !q.anharmonicity.is_finite() {
                return Err(Error::invariant(f("anharmonicity_ghz"), "must be finite"));
            }
            if q.t1.is_nan() || q.t1 <= 0.0 {
                return Err(Error::invariant(
                    f("t1_us"),
                    format!("t1 = {} must be > 0", q.t1),
                ));
            }
            if q.t2.is_nan() || q.t2 <= 0.0 || q.t2 > 2.0 * q.t1 {
                return Err(Error::invariant(
                    f("t2_us"),
                    format!("t2 = {} must satisfy 0 < t2 <= 2*t1 = {}", q.t2, 2.0 * q.t1),
                ));
            }
            check_probability(f("readout_p0_given_1"), q.readout_p0_given_1)?;
            check_probability(f("readout_p1_given_0"), q.readout_p1_given_0)?;
            check_probability(f("sq_error"), q.sq_error)?;
            if !q.sq_duration.is_finite() || q.sq_duration < 0.0 {
                return Err(Error::invariant(
                    f("sq_duration_ns"),
                    "must be finite and >= 0",
                ));
            }
        }

        let mut adjacency: BTreeMap<usize, BTreeSet<usize>> =
            index.keys().map(|&id| (id, BTreeSet::new())).collect();
        for (pos, e) in edges.iter().enumerate() {
            let f = |name: &str| format!("edges[{pos}].{name}");
            for (name, id) in [("drive", e.drive), ("target", e.target)] {
                if !index.contains_key(&id) {
                    return Err(Error::invariant(f(name), format!("unknown qubit {id}")));
                }
            }
            if e.drive == e.target {
                return Err(Error::invariant(f("target"), "drive and target coincide"));
            }
            if !adjacency.get_mut(&e.drive).unwrap().insert(e.target) {
                return Err(Error::invariant(
                    f("target"),
                    format!("duplicate coupling {}-{}", e.drive, e.target),
                ));
            }
            adjacency.get_mut(&e.target).unwrap().insert(e.drive);
            check_probability(f("cx_error"), e.cx_error)?;
            if !e.cx_duration.is_finite() || e.cx_duration < 0.0 {
                return Err(Error::invariant(
                    f("cx_duration_ns"),
                    "must be finite and >= 0",
                ));
            }
        }

        // Connectivity by BFS from the smallest id.
        let start = *index.keys().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            for &n in &adjacency[&q] {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        if seen.len() != index.len() {
            let missing = index.keys().find(|id| !seen.contains(id)).unwrap();
            return Err(Error::invariant(
                "edges",
                format!("coupling graph is not connected (qubit {missing} unreachable)"),
            ));
        }

        Ok(Self {
            name: name.into(),
            timestamp: timestamp.into(),
            qubits,
            edges,
            index,
            adjacency,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Qubit ids in ascending order.
    pub fn qubit_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.index.keys().copied()
    }

    /// One more than the largest qubit id; the width of circuits on this device.
    pub fn width(&self) -> usize {
        self.index.keys().next_back().map_or(0, |m| m + 1)
    }

    pub fn qubit(&self, id: usize) -> Option<&QubitCalibration> {
        self.index.get(&id).map(|&p| &self.qubits[p])
    }

    pub fn neighbors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.get(&id).into_iter().flatten().copied()
    }

    pub fn degree(&self, id: usize) -> usize {
        self.adjacency.get(&id).map_or(0, BTreeSet::len)
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(&a).is_some_and(|s| s.contains(&b))
    }

    /// Calibration of the coupler between `a` and `b`, in either orientation.
    pub fn edge(&self, a: usize, b: usize) -> Option<&EdgeCalibration> {
        self.edges
            .iter()
            .find(|e| (e.drive == a && e.target == b) || (e.drive == b && e.target == a))
    }

    /// Undirected edges as `(min, max)` pairs, sorted.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self
            .edges
            .iter()
            .map(|e| (e.drive.min(e.target), e.drive.max(e.target)))
            .collect();
        v.sort_unstable();
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }
}

/// Parses and validates a calibration JSON document. Unknown fields are ignored.
pub fn load_snapshot(mut source: impl Read) -> Result<DeviceSnapshot> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let raw: RawSnapshot =
        serde_json::from_str(&text).map_err(|e| Error::parse("calibration JSON", e))?;
    DeviceSnapshot::new(raw.name, raw.timestamp, raw.qubits, raw.edges)
}
