use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{Circuit, Gate};
use crate::device::DeviceSnapshot;
use crate::{Error, Result};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduledItem {
    pub start: f64,
    pub end: f64,
    pub qubits: Vec<usize>,
    /// Whether this instruction makes its qubits active (anything but
    /// barriers, delays, measurements and frame insertions).
    pub activates: bool,
}

/// Timed placement of a circuit, in nanoseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    /// One item per instruction, in instruction order.
    pub items: Vec<ScheduledItem>,
    /// Gaps between consecutive operations of each used qubit over
    /// `[0, duration]`.
    pub idle_intervals: BTreeMap<usize, Vec<(f64, f64)>>,
    /// End of the last gate; all measurements are placed here.
    pub duration: f64,
}

fn gate_duration(gate: &Gate, qubits: &[usize], frame: bool, snap: &DeviceSnapshot) -> Result<f64> {
    if frame {
        return Ok(0.0);
    }
    let qubit = |q: usize| {
        snap.qubit(q)
            .ok_or_else(|| Error::invariant("qubits", format!("qubit {q} is not on the device")))
    };
    Ok(match gate {
        Gate::Barrier | Gate::RZ(_) | Gate::Measure => {
            for &q in qubits {
                qubit(q)?;
            }
            0.0
        }
        Gate::Delay(d) => {
            qubit(qubits[0])?;
            *d
        }
        Gate::CX => {
            snap.edge(qubits[0], qubits[1])
                .ok_or(Error::NotAnEdge(qubits[0], qubits[1]))?
                .cx_duration
        }
        _ => qubit(qubits[0])?.sq_duration,
    })
}

/// As-soon-as-possible schedule. Each instruction starts when all of its
/// qubits are free; a barrier aligns its qubits to their latest free time.
/// Measurements are deferred to the end of the circuit.
pub fn schedule(circuit: &Circuit, snapshot: &DeviceSnapshot) -> Result<Schedule> {
    let mut free: BTreeMap<usize, f64> = BTreeMap::new();
    let mut items = Vec::with_capacity(circuit.len());
    let mut busy: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    let mut used = BTreeSet::new();

    for inst in circuit.instructions() {
        let dur = gate_duration(&inst.gate, &inst.qubits, inst.frame, snapshot)?;
        let start = inst
            .qubits
            .iter()
            .map(|q| free.get(q).copied().unwrap_or(0.0))
            .fold(0.0, f64::max);
        let end = start + dur;
        if inst.gate != Gate::Measure {
            for &q in &inst.qubits {
                free.insert(q, end);
            }
        }
        if inst.gate != Gate::Barrier {
            used.extend(inst.qubits.iter().copied());
        }
        if dur > 0.0 {
            for &q in &inst.qubits {
                busy.entry(q).or_default().push((start, end));
            }
        }
        let activates =
            !inst.frame && !matches!(inst.gate, Gate::Barrier | Gate::Delay(_) | Gate::Measure);
        items.push(ScheduledItem {
            start,
            end,
            qubits: inst.qubits.clone(),
            activates,
        });
    }

    let duration = free.values().copied().fold(0.0, f64::max);
    for (inst, item) in circuit.instructions().iter().zip(items.iter_mut()) {
        if inst.gate == Gate::Measure {
            item.start = duration;
            item.end = duration;
        }
    }

    let mut idle_intervals = BTreeMap::new();
    for q in used {
        let mut gaps = Vec::new();
        let mut t = 0.0;
        for &(s, e) in busy.get(&q).map(Vec::as_slice).unwrap_or(&[]) {
            if s > t + EPS {
                gaps.push((t, s));
            }
            t = t.max(e);
        }
        if duration > t + EPS {
            gaps.push((t, duration));
        }
        idle_intervals.insert(q, gaps);
    }

    Ok(Schedule {
        items,
        idle_intervals,
        duration,
    })
}

impl Schedule {
    /// Total busy time of qubit `q` (positive-duration items).
    pub fn busy_time(&self, q: usize) -> f64 {
        self.items
            .iter()
            .filter(|i| i.qubits.contains(&q))
            .map(|i| i.end - i.start)
            .sum()
    }

    pub fn idle_time(&self, q: usize) -> f64 {
        self.idle_intervals
            .get(&q)
            .map_or(0.0, |v| v.iter().map(|(s, e)| e - s).sum())
    }
}

/// Qubits that have started at least one activating instruction before `at`
/// (or completed one by `at`).
pub fn active_qubits(schedule: &Schedule, at: f64) -> BTreeSet<usize> {
    schedule
        .items
        .iter()
        .filter(|i| i.activates && (i.end <= at + EPS || i.start < at - EPS))
        .flat_map(|i| i.qubits.iter().copied())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{EdgeCalibration, QubitCalibration};

    pub(crate) fn line(n: usize) -> DeviceSnapshot {
        let qubits = (0..n)
            .map(|id| QubitCalibration {
                id,
                frequency: 5.0,
                anharmonicity: -0.33,
                t1: 100.0,
                t2: 100.0,
                readout_p0_given_1: 0.0,
                readout_p1_given_0: 0.0,
                sq_error: 0.0,
                sq_duration: 35.0,
            })
            .collect();
        let edges = (0..n - 1)
            .map(|i| EdgeCalibration {
                drive: i,
                target: i + 1,
                cx_error: 0.0,
                cx_duration: 300.0,
            })
            .collect();
        DeviceSnapshot::new("line", "", qubits, edges).unwrap()
    }

    #[test]
    fn asap_arithmetic() {
        let mut c = Circuit::new(2);
        c.add(Gate::X, &[0]).add(Gate::CX, &[0, 1]);
        let s = schedule(&c, &line(2)).unwrap();
        assert_eq!((s.items[1].start, s.items[1].end), (35.0, 335.0));
        assert_eq!(s.idle_intervals[&1], vec![(0.0, 35.0)]);
        assert!(s.idle_intervals[&0].is_empty());
    }

    #[test]
    fn disjoint_gates_start_together() {
        let mut c = Circuit::new(2);
        c.add(Gate::X, &[0]).add(Gate::X, &[1]);
        let s = schedule(&c, &line(2)).unwrap();
        assert_eq!(s.items[0].start, 0.0);
        assert_eq!(s.items[1].start, 0.0);
    }

    #[test]
    fn barrier_synchronizes() {
        let mut c = Circuit::new(2);
        c.add(Gate::X, &[0])
            .add(Gate::Barrier, &[0, 1])
            .add(Gate::X, &[1]);
        let s = schedule(&c, &line(2)).unwrap();
        assert_eq!(s.items[2].start, 35.0);
        assert_eq!(s.idle_intervals[&1], vec![(0.0, 35.0)]);
    }

    #[test]
    fn virtual_rz_and_measurement_alignment() {
        let mut c = Circuit::new(2);
        c.add(Gate::RZ(0.3), &[0])
            .add(Gate::X, &[1])
            .add(Gate::X, &[1])
            .measure_all();
        let s = schedule(&c, &line(2)).unwrap();
        assert_eq!(s.items[0].end, 0.0);
        assert_eq!(s.duration, 70.0);
        assert_eq!(s.items[3].start, 70.0);
        assert_eq!(s.items[4].start, 70.0);
        assert_eq!(s.idle_intervals[&0], vec![(0.0, 70.0)]);
        for q in [0, 1] {
            assert!((s.idle_time(q) + s.busy_time(q) - s.duration).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_edge_is_an_error() {
        let mut c = Circuit::new(3);
        c.add(Gate::CX, &[0, 2]);
        assert!(matches!(
            schedule(&c, &line(3)),
            Err(Error::NotAnEdge(0, 2))
        ));
    }

    #[test]
    fn activity() {
        let mut c = Circuit::new(3);
        c.add(Gate::X, &[0])
            .add(Gate::Delay(500.0), &[2])
            .add(Gate::CX, &[0, 1]);
        let s = schedule(&c, &line(3)).unwrap();
        assert!(active_qubits(&s, 0.0).is_empty());
        assert_eq!(active_qubits(&s, 35.0), BTreeSet::from([0]));
        assert_eq!(active_qubits(&s, 36.0), BTreeSet::from([0, 1]));
        // Delay-only qubit never becomes active.
        assert!(!active_qubits(&s, 10_000.0).contains(&2));
    }

    #[test]
    fn deterministic_schedule() {
        let mut c = Circuit::new(3);
        c.add(Gate::H, &[0])
            .add(Gate::CX, &[0, 1])
            .add(Gate::SX, &[2])
            .add(Gate::CX, &[1, 2]);
        let a = serde_json::to_string(&schedule(&c, &line(3)).unwrap()).unwrap();
        let b = serde_json::to_string(&schedule(&c, &line(3)).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
