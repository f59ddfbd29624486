use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DeviceSnapshot;
use crate::{Error, Result};

/// Frequency-collision rules.
///
/// - `R1`: neighbors with |ω01(A) − ω01(B)| < τ1.
/// - `R2`: neighbors with |ω01(A) − ω12(B)| < τ2.
/// - `R3`: target and spectator sharing a drive, |ω01(target) − ω01(spectator)| < τ3.
/// - `R4`: target and spectator sharing a drive, |ω01(target) − ω12(spectator)| < τ4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CollisionRule {
    R1,
    R2,
    R3,
    R4,
}

/// Per-rule detuning thresholds in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionThresholds {
    #[serde(default = "default_tau")]
    pub r1: f64,
    #[serde(default = "default_tau")]
    pub r2: f64,
    #[serde(default = "default_tau")]
    pub r3: f64,
    #[serde(default = "default_tau")]
    pub r4: f64,
}

fn default_tau() -> f64 {
    CollisionThresholds::DEFAULT_GHZ
}

impl CollisionThresholds {
    pub const DEFAULT_GHZ: f64 = 0.017;

    pub fn uniform(tau: f64) -> Self {
        Self {
            r1: tau,
            r2: tau,
            r3: tau,
            r4: tau,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text).map_err(|e| Error::parse("threshold JSON", e))?;
        for (name, v) in [("r1", t.r1), ("r2", t.r2), ("r3", t.r3), ("r4", t.r4)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invariant(
                    name,
                    format!("threshold {v} must be positive"),
                ));
            }
        }
        Ok(t)
    }

    fn get(&self, rule: CollisionRule) -> f64 {
        match rule {
            CollisionRule::R1 => self.r1,
            CollisionRule::R2 => self.r2,
            CollisionRule::R3 => self.r3,
            CollisionRule::R4 => self.r4,
        }
    }
}

impl Default for CollisionThresholds {
    fn default() -> Self {
        Self::uniform(Self::DEFAULT_GHZ)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub rule_id: CollisionRule,
    /// R1: `[A, B]` with A < B. R2: `[A, B]`. R3/R4: `[drive, target, spectator]`.
    pub qubits: Vec<usize>,
    /// Signed distance from exact resonance in GHz.
    pub detuning: f64,
}

pub fn detect_collisions(
    snapshot: &DeviceSnapshot,
    thresholds: &CollisionThresholds,
) -> Result<Vec<CollisionReport>> {
    for rule in [
        CollisionRule::R1,
        CollisionRule::R2,
        CollisionRule::R3,
        CollisionRule::R4,
    ] {
        let tau = thresholds.get(rule);
        if !(tau > 0.0) {
            return Err(Error::Domain(format!(
                "threshold for {rule:?} must be positive, got {tau}"
            )));
        }
    }
    let f01 = |q: usize| snapshot.qubit(q).unwrap().frequency;
    let f12 = |q: usize| snapshot.qubit(q).unwrap().frequency_12();
    let mut out = Vec::new();
    let mut push = |rule, qubits: Vec<usize>, detuning: f64| {
        if detuning.abs() < thresholds.get(rule) {
            out.push(CollisionReport {
                rule_id: rule,
                qubits,
                detuning,
            });
        }
    };

    for (a, b) in snapshot.undirected_edges() {
        push(CollisionRule::R1, vec![a, b], f01(a) - f01(b));
        push(CollisionRule::R2, vec![a, b], f01(a) - f12(b));
        push(CollisionRule::R2, vec![b, a], f01(b) - f12(a));
    }

    let mut seen = BTreeSet::new();
    for e in &snapshot.edges {
        for s in snapshot.neighbors(e.drive).filter(|&s| s != e.target) {
            if !seen.insert((e.drive, e.target, s)) {
                continue;
            }
            let qs = vec![e.drive, e.target, s];
            push(CollisionRule::R3, qs.clone(), f01(e.target) - f01(s));
            push(CollisionRule::R4, qs, f01(e.target) - f12(s));
        }
    }
    out.sort_by(|x, y| {
        x.rule_id
            .cmp(&y.rule_id)
            .then_with(|| x.qubits.cmp(&y.qubits))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{EdgeCalibration, QubitCalibration};

    fn device(freqs: &[(f64, f64)], edges: &[(usize, usize)]) -> DeviceSnapshot {
        let qubits = freqs
            .iter()
            .enumerate()
            .map(|(id, &(f, a))| QubitCalibration {
                id,
                frequency: f,
                anharmonicity: a,
                t1: 100.0,
                t2: 100.0,
                readout_p0_given_1: 0.0,
                readout_p1_given_0: 0.0,
                sq_error: 0.0,
                sq_duration: 35.0,
            })
            .collect();
        let edges = edges
            .iter()
            .map(|&(d, t)| EdgeCalibration {
                drive: d,
                target: t,
                cx_error: 0.0,
                cx_duration: 300.0,
            })
            .collect();
        DeviceSnapshot::new("toy", "", qubits, edges).unwrap()
    }

    #[test]
    fn nearest_neighbor_degeneracy() {
        let snap = device(&[(5.000, -0.34), (5.001, -0.34)], &[(0, 1)]);
        let r = detect_collisions(&snap, &CollisionThresholds::uniform(0.005)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rule_id, CollisionRule::R1);
        assert_eq!(r[0].qubits, vec![0, 1]);
        assert!((r[0].detuning + 0.001).abs() < 1e-12);
    }

    #[test]
    fn r1_is_reported_once_regardless_of_orientation() {
        let a = device(&[(5.000, -0.34), (5.001, -0.34)], &[(0, 1)]);
        let b = device(&[(5.000, -0.34), (5.001, -0.34)], &[(1, 0)]);
        let t = CollisionThresholds::uniform(0.005);
        assert_eq!(
            detect_collisions(&a, &t).unwrap(),
            detect_collisions(&b, &t).unwrap()
        );
    }

    #[test]
    fn second_transition_resonance() {
        let snap = device(&[(5.000, -0.30), (5.340, -0.340)], &[(0, 1)]);
        let r = detect_collisions(&snap, &CollisionThresholds::default()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rule_id, CollisionRule::R2);
        assert_eq!(r[0].qubits, vec![0, 1]);
        assert!(r[0].detuning.abs() < 1e-12);
    }

    #[test]
    fn spectator_rules() {
        // drive 0, target 1, spectator 2: ω01(1) = 5.2, ω12(2) = 5.2.
        let snap = device(&[(4.7, -0.3), (5.2, -0.3), (5.5, -0.3)], &[(0, 1), (0, 2)]);
        let r = detect_collisions(&snap, &CollisionThresholds::uniform(0.01)).unwrap();
        assert!(r
            .iter()
            .any(|c| c.rule_id == CollisionRule::R4 && c.qubits == vec![0, 1, 2]));
        assert!(r.iter().all(|c| c.rule_id == CollisionRule::R4));
    }

    #[test]
    fn well_separated_device_is_clean() {
        let snap = device(
            &[(4.8, -0.33), (5.05, -0.33), (5.3, -0.33)],
            &[(0, 1), (1, 2)],
        );
        assert!(
            detect_collisions(&snap, &CollisionThresholds::uniform(0.01))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn threshold_json() {
        let t = CollisionThresholds::from_json(r#"{"r1":0.01,"r3":0.02}"#).unwrap();
        assert_eq!(t.r1, 0.01);
        assert_eq!(t.r2, CollisionThresholds::DEFAULT_GHZ);
        assert!(CollisionThresholds::from_json(r#"{"r1":-1}"#).is_err());
        assert!(detect_collisions(
            &device(&[(5.0, -0.3)], &[]),
            &CollisionThresholds::uniform(0.0)
        )
        .is_err());
    }
}
