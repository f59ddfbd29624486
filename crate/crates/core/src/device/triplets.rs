use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DeviceSnapshot;
use crate::{Error, Result};

/// A calibrated pair plus one neighbor of its drive qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triplet {
    pub drive: usize,
    pub target: usize,
    pub spectator: usize,
}

impl Triplet {
    pub fn new(drive: usize, target: usize, spectator: usize) -> Self {
        Self {
            drive,
            target,
            spectator,
        }
    }

    pub fn qubits(&self) -> [usize; 3] {
        [self.drive, self.target, self.spectator]
    }

    pub fn contains(&self, q: usize) -> bool {
        self.qubits().contains(&q)
    }

    /// Checks the triplet against the device: `(drive, target)` must be a
    /// calibrated edge in that orientation and the spectator a third
    /// neighbor of the drive.
    pub fn validate(&self, snapshot: &DeviceSnapshot) -> Result<()> {
        let calibrated = snapshot
            .edges
            .iter()
            .any(|e| e.drive == self.drive && e.target == self.target);
        if !calibrated {
            return Err(Error::invariant(
                "pair",
                format!(
                    "({}, {}) is not a calibrated drive/target edge",
                    self.drive, self.target
                ),
            ));
        }
        if self.spectator == self.drive || self.spectator == self.target {
            return Err(Error::invariant(
                "spectator",
                format!("{self} repeats a pair qubit"),
            ));
        }
        if !snapshot.are_adjacent(self.drive, self.spectator) {
            return Err(Error::invariant(
                "spectator",
                format!("{} is not adjacent to drive {}", self.spectator, self.drive),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Triplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "([{}, {}], [{}])",
            self.drive, self.target, self.spectator
        )
    }
}

#[derive(Serialize, Deserialize)]
struct TripletJson {
    pair: [usize; 2],
    spectator: usize,
}

impl Serialize for Triplet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TripletJson {
            pair: [self.drive, self.target],
            spectator: self.spectator,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Triplet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = TripletJson::deserialize(d)?;
        Ok(Triplet::new(t.pair[0], t.pair[1], t.spectator))
    }
}

/// Triplets characterized in the same circuits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Batch {
    pub triplets: Vec<Triplet>,
}

/// One triplet per (calibrated edge, neighbor of the drive other than the
/// target), sorted by (drive, target, spectator).
pub fn extract_triplets(snapshot: &DeviceSnapshot) -> Vec<Triplet> {
    let mut out: Vec<Triplet> = snapshot
        .edges
        .iter()
        .flat_map(|e| {
            snapshot
                .neighbors(e.drive)
                .filter(move |&s| s != e.target)
                .map(move |s| Triplet::new(e.drive, e.target, s))
        })
        .collect();
    out.sort_unstable();
    out
}

/// Two triplets may not run in the same batch if they share a qubit or if
/// the drive qubit of either is adjacent to any qubit of the other.
pub fn triplets_conflict(a: &Triplet, b: &Triplet, snapshot: &DeviceSnapshot) -> bool {
    let shares = a.qubits().iter().any(|&q| b.contains(q));
    let drive_near = |x: &Triplet, y: &Triplet| {
        y.qubits()
            .iter()
            .any(|&q| snapshot.are_adjacent(x.drive, q))
    };
    shares || drive_near(a, b) || drive_near(b, a)
}

/// Greedy smallest-index coloring of the conflict graph, visiting triplets
/// in sorted order.
pub fn schedule_batches(triplets: &[Triplet], snapshot: &DeviceSnapshot) -> Vec<Batch> {
    let mut sorted = triplets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut batches: Vec<Batch> = Vec::new();
    for t in sorted {
        let slot = batches.iter().position(|b| {
            b.triplets
                .iter()
                .all(|o| !triplets_conflict(o, &t, snapshot))
        });
        match slot {
            Some(i) => batches[i].triplets.push(t),
            None => batches.push(Batch { triplets: vec![t] }),
        }
    }
    batches
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BatchViolation {
    InvalidTriplet {
        batch: usize,
        triplet: Triplet,
        reason: String,
    },
    Conflict {
        batch: usize,
        first: Triplet,
        second: Triplet,
        shared: Vec<usize>,
    },
    Missing {
        triplet: Triplet,
    },
    Duplicate {
        triplet: Triplet,
        count: usize,
    },
    Unexpected {
        triplet: Triplet,
    },
}

/// Checks batch invariants and coverage of [`extract_triplets`] on the
/// snapshot. An empty result means the assignment is valid.
pub fn validate_batches(batches: &[Batch], snapshot: &DeviceSnapshot) -> Vec<BatchViolation> {
    let mut violations = Vec::new();
    let mut seen: BTreeMap<Triplet, usize> = BTreeMap::new();
    for (bi, batch) in batches.iter().enumerate() {
        for t in &batch.triplets {
            *seen.entry(*t).or_default() += 1;
            if let Err(e) = t.validate(snapshot) {
                violations.push(BatchViolation::InvalidTriplet {
                    batch: bi,
                    triplet: *t,
                    reason: e.to_string(),
                });
            }
        }
        for (i, a) in batch.triplets.iter().enumerate() {
            for b in &batch.triplets[i + 1..] {
                if triplets_conflict(a, b, snapshot) {
                    let shared = a.qubits().into_iter().filter(|&q| b.contains(q)).collect();
                    violations.push(BatchViolation::Conflict {
                        batch: bi,
                        first: *a,
                        second: *b,
                        shared,
                    });
                }
            }
        }
    }
    let expected = extract_triplets(snapshot);
    for t in &expected {
        match seen.get(t) {
            None => violations.push(BatchViolation::Missing { triplet: *t }),
            Some(&c) if c > 1 => violations.push(BatchViolation::Duplicate {
                triplet: *t,
                count: c,
            }),
            _ => {}
        }
    }
    for t in seen.keys() {
        if expected.binary_search(t).is_err() {
            violations.push(BatchViolation::Unexpected { triplet: *t });
        }
    }
    violations
}

pub fn batches_from_json(text: &str) -> Result<Vec<Batch>> {
    serde_json::from_str(text).map_err(|e| Error::parse("batch JSON", e))
}

pub fn batches_to_json(batches: &[Batch]) -> String {
    serde_json::to_string_pretty(batches).expect("batches serialize")
}
