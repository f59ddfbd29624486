use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{
    depol_on_top, rate_to_depol, CrosstalkInjection, CrosstalkRates, CrosstalkTable, KrausChannel,
    ThermalRelaxationParams,
};
use crate::circuit::{active_qubits, schedule, Circuit, Gate, Schedule};
use crate::device::{extract_triplets, DeviceSnapshot, Triplet};
use crate::simulator::ReadoutError;
use crate::{Error, Result};

/// Channels attached to one gate: per-qubit thermal relaxation over the
/// gate duration, then depolarizing of total weight `depolarizing` over
/// all of the gate's qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateNoise {
    pub relaxation: Vec<ThermalRelaxationParams>,
    pub depolarizing: f64,
    pub target_error: f64,
}

impl GateNoise {
    fn tuned(relaxation: Vec<ThermalRelaxationParams>, target: f64) -> (Self, bool) {
        let fe: f64 = relaxation
            .iter()
            .map(|p| p.channel().entanglement_fidelity())
            .product();
        let (depolarizing, clamped) = depol_on_top(fe, relaxation.len(), target);
        (
            Self {
                relaxation,
                depolarizing,
                target_error: target,
            },
            clamped,
        )
    }

    /// Full Kraus form of the composite (relaxation, then depolarizing).
    pub fn channel(&self) -> KrausChannel {
        let relax = self.relaxation[1..]
            .iter()
            .fold(self.relaxation[0].channel(), |acc, p| {
                acc.tensor(&p.channel())
            });
        let arity = self.relaxation.len();
        let p = self.depolarizing / (1u64 << (2 * arity)) as f64;
        relax.then(&super::depolarizing(arity, p).expect("weight within [0, 1]"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseWarning {
    pub location: String,
    pub message: String,
}

/// Calibration-driven noise model, independent of any circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub single_qubit: BTreeMap<usize, GateNoise>,
    /// Keyed by native `(drive, target)`.
    pub cx: BTreeMap<(usize, usize), GateNoise>,
    pub readout: BTreeMap<usize, ReadoutError>,
    /// `(t1, t2)` in µs for idle relaxation.
    pub coherence: BTreeMap<usize, (f64, f64)>,
    pub idle_relaxation: bool,
    pub warnings: Vec<NoiseWarning>,
}

fn relaxation(snapshot: &DeviceSnapshot, q: usize, duration: f64) -> ThermalRelaxationParams {
    let c = snapshot.qubit(q).expect("qubit exists");
    ThermalRelaxationParams::new(c.t1, c.t2, duration).expect("snapshot invariants hold")
}

/// Depolarizing tuned on top of thermal relaxation so each gate's composite
/// average error matches the snapshot; readout and idle relaxation from the
/// snapshot. Infeasible rates clamp the depolarizing part to zero and
/// record a warning.
pub fn build_standard_model(snapshot: &DeviceSnapshot) -> NoiseModel {
    let mut warnings = Vec::new();
    let mut single_qubit = BTreeMap::new();
    let mut readout = BTreeMap::new();
    let mut coherence = BTreeMap::new();
    for q in &snapshot.qubits {
        let (noise, clamped) =
            GateNoise::tuned(vec![relaxation(snapshot, q.id, q.sq_duration)], q.sq_error);
        if clamped {
            warnings.push(NoiseWarning {
                location: format!("qubit {}", q.id),
                message: format!(
                    "sq_error {} is below the relaxation floor; depolarizing set to 0",
                    q.sq_error
                ),
            });
        }
        single_qubit.insert(q.id, noise);
        readout.insert(
            q.id,
            ReadoutError {
                p0_given_1: q.readout_p0_given_1,
                p1_given_0: q.readout_p1_given_0,
            },
        );
        coherence.insert(q.id, (q.t1, q.t2));
    }
    let mut cx = BTreeMap::new();
    for e in &snapshot.edges {
        let relax = vec![
            relaxation(snapshot, e.drive, e.cx_duration),
            relaxation(snapshot, e.target, e.cx_duration),
        ];
        let (noise, clamped) = GateNoise::tuned(relax, e.cx_error);
        if clamped {
            warnings.push(NoiseWarning {
                location: format!("edge ({}, {})", e.drive, e.target),
                message: format!(
                    "cx_error {} is below the relaxation floor; depolarizing set to 0",
                    e.cx_error
                ),
            });
        }
        cx.insert((e.drive, e.target), noise);
    }
    for w in &warnings {
        log::warn!("{}: {}", w.location, w.message);
    }
    NoiseModel {
        single_qubit,
        cx,
        readout,
        coherence,
        idle_relaxation: true,
        warnings,
    }
}

/// A channel attached at one point of a bound circuit.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelSpec {
    ThermalRelaxation {
        qubit: usize,
        params: ThermalRelaxationParams,
    },
    Depolarizing {
        qubits: Vec<usize>,
        weight: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelOrigin {
    Gate,
    Idle,
    Crosstalk,
    Spectator,
    Injection,
    CliffordLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttachedChannel {
    pub origin: ChannelOrigin,
    #[serde(flatten)]
    pub channel: ChannelSpec,
}

/// Noise around one instruction: `before` (idle relaxation accumulated
/// since each qubit's previous operation), then the unitary, then `after`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InstructionNoise {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub before: Vec<AttachedChannel>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub after: Vec<AttachedChannel>,
}

/// Noise bound to the schedule of a particular circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundNoiseModel {
    pub circuit: Circuit,
    pub schedule: Schedule,
    pub instructions: Vec<InstructionNoise>,
    /// Idle relaxation of measured qubits up to the measurement time.
    pub trailing: Vec<AttachedChannel>,
    /// Readout error per measured bit, in MEASURE order.
    pub readout: Vec<ReadoutError>,
    pub warnings: Vec<NoiseWarning>,
}

/// One step of noisy execution.
#[derive(Debug, Clone)]
pub enum NoisyOp {
    Unitary {
        gate: Gate,
        qubits: Vec<usize>,
    },
    Kraus {
        channel: Arc<KrausChannel>,
        qubits: Vec<usize>,
    },
    Depolarize {
        qubits: Vec<usize>,
        weight: f64,
    },
}

impl NoisyOp {
    pub fn qubits(&self) -> &[usize] {
        match self {
            NoisyOp::Unitary { qubits, .. }
            | NoisyOp::Kraus { qubits, .. }
            | NoisyOp::Depolarize { qubits, .. } => qubits,
        }
    }
}

impl ChannelSpec {
    fn to_op(&self) -> Option<NoisyOp> {
        match self {
            ChannelSpec::ThermalRelaxation { qubit, params } => {
                (params.gamma > 0.0 || params.lambda > 0.0).then(|| NoisyOp::Kraus {
                    channel: Arc::new(params.channel()),
                    qubits: vec![*qubit],
                })
            }
            ChannelSpec::Depolarizing { qubits, weight } => {
                (*weight > 0.0).then(|| NoisyOp::Depolarize {
                    qubits: qubits.clone(),
                    weight: *weight,
                })
            }
        }
    }
}

impl BoundNoiseModel {
    /// Schedule only, no channels and perfect readout.
    pub fn noiseless(circuit: &Circuit, snapshot: &DeviceSnapshot) -> Result<Self> {
        let schedule = schedule(circuit, snapshot)?;
        Ok(Self {
            circuit: circuit.clone(),
            instructions: vec![InstructionNoise::default(); circuit.len()],
            schedule,
            trailing: Vec::new(),
            readout: vec![ReadoutError::NONE; circuit.measured_qubits().len()],
            warnings: Vec::new(),
        })
    }

    /// Execution order of unitaries and channels.
    pub fn program(&self) -> Vec<NoisyOp> {
        let mut ops = Vec::new();
        for (inst, noise) in self.circuit.instructions().iter().zip(&self.instructions) {
            ops.extend(noise.before.iter().filter_map(|c| c.channel.to_op()));
            if inst.gate.is_unitary() {
                ops.push(NoisyOp::Unitary {
                    gate: inst.gate,
                    qubits: inst.qubits.clone(),
                });
            }
            ops.extend(noise.after.iter().filter_map(|c| c.channel.to_op()));
        }
        ops.extend(self.trailing.iter().filter_map(|c| c.channel.to_op()));
        ops
    }

    /// Indices of CX instructions with the spectators active at their
    /// start, per triplet of `triplets` matching the CX's pair.
    fn cx_with_active_spectators<'a>(
        &'a self,
        triplets: &'a [Triplet],
    ) -> impl Iterator<Item = (usize, Vec<&'a Triplet>)> + 'a {
        self.circuit
            .instructions()
            .iter()
            .enumerate()
            .filter_map(move |(k, inst)| {
                if inst.gate != Gate::CX || inst.frame {
                    return None;
                }
                let active = active_qubits(&self.schedule, self.schedule.items[k].start);
                let hits: Vec<&Triplet> = triplets
                    .iter()
                    .filter(|t| {
                        t.drive == inst.qubits[0]
                            && t.target == inst.qubits[1]
                            && active.contains(&t.spectator)
                    })
                    .collect();
                (!hits.is_empty()).then_some((k, hits))
            })
    }

    /// Appends per-Clifford-layer depolarizing at every barrier. A barrier
    /// over `[a]` closes a single-qubit layer, `[a, b]` a two-qubit layer,
    /// and `[a, b, c]` a two-qubit layer on `(a, b)` next to a single-qubit
    /// layer on `c`. Wider barriers are left alone.
    pub fn attach_clifford_layers(
        &mut self,
        one_qubit_rate: f64,
        two_qubit_rate: f64,
    ) -> Result<()> {
        let w1 = rate_to_depol(one_qubit_rate, 1)?.lambda;
        let w2 = rate_to_depol(two_qubit_rate, 2)?.lambda;
        for (inst, noise) in self
            .circuit
            .instructions()
            .iter()
            .zip(self.instructions.iter_mut())
        {
            if inst.gate != Gate::Barrier {
                continue;
            }
            let q = &inst.qubits;
            let parts: Vec<(Vec<usize>, f64)> = match q.len() {
                1 => vec![(q.clone(), w1)],
                2 => vec![(q.clone(), w2)],
                3 => vec![(q[..2].to_vec(), w2), (vec![q[2]], w1)],
                _ => vec![],
            };
            for (qubits, weight) in parts {
                noise.after.push(AttachedChannel {
                    origin: ChannelOrigin::CliffordLayer,
                    channel: ChannelSpec::Depolarizing { qubits, weight },
                });
            }
        }
        Ok(())
    }

    /// JSON report of the attachment points and strengths.
    pub fn report(&self) -> serde_json::Value {
        let instructions: Vec<serde_json::Value> = self
            .circuit
            .instructions()
            .iter()
            .zip(&self.instructions)
            .zip(&self.schedule.items)
            .enumerate()
            .filter(|(_, ((_, n), _))| !n.before.is_empty() || !n.after.is_empty())
            .map(|(k, ((inst, n), item))| {
                serde_json::json!({
                    "index": k,
                    "gate": inst.gate.name(),
                    "qubits": inst.qubits,
                    "start_ns": item.start,
                    "end_ns": item.end,
                    "before": n.before,
                    "after": n.after,
                })
            })
            .collect();
        serde_json::json!({
            "duration_ns": self.schedule.duration,
            "instructions": instructions,
            "trailing": self.trailing,
            "readout": self.readout,
            "warnings": self.warnings,
        })
    }
}

impl NoiseModel {
    /// Attaches the model's channels to `circuit`'s schedule. CX gates must
    /// be in native orientation.
    pub fn bind(&self, circuit: &Circuit, snapshot: &DeviceSnapshot) -> Result<BoundNoiseModel> {
        let mut bound = BoundNoiseModel::noiseless(circuit, snapshot)?;
        let mut last_end: BTreeMap<usize, f64> = BTreeMap::new();
        let idle = |q: usize, from: f64, to: f64| -> Option<AttachedChannel> {
            if !self.idle_relaxation || to - from <= 1e-9 {
                return None;
            }
            let (t1, t2) = self.coherence[&q];
            let params =
                ThermalRelaxationParams::new(t1, t2, to - from).expect("coherence times validated");
            Some(AttachedChannel {
                origin: ChannelOrigin::Idle,
                channel: ChannelSpec::ThermalRelaxation { qubit: q, params },
            })
        };

        for (k, inst) in circuit.instructions().iter().enumerate() {
            let item = &bound.schedule.items[k];
            let noise = &mut bound.instructions[k];
            if matches!(inst.gate, Gate::Barrier | Gate::Measure) {
                continue;
            }
            // A qubit's first operation starts from |0>, which relaxation
            // leaves unchanged, so only gaps after an operation count.
            for &q in &inst.qubits {
                if let Some(&prev) = last_end.get(&q) {
                    noise.before.extend(idle(q, prev, item.start));
                }
                last_end.insert(q, item.end);
            }
            if inst.frame {
                continue;
            }
            let gate_noise = match inst.gate {
                Gate::Delay(_) => {
                    noise
                        .after
                        .extend(idle(inst.qubits[0], item.start, item.end));
                    continue;
                }
                Gate::RZ(_) => continue,
                Gate::CX => {
                    let key = (inst.qubits[0], inst.qubits[1]);
                    self.cx.get(&key).ok_or_else(|| {
                        Error::invariant(
                            format!("instructions[{k}]"),
                            format!("CX{key:?} is not a native edge"),
                        )
                    })?
                }
                _ => &self.single_qubit[&inst.qubits[0]],
            };
            for (&q, params) in inst.qubits.iter().zip(&gate_noise.relaxation) {
                if params.gamma > 0.0 || params.lambda > 0.0 {
                    noise.after.push(AttachedChannel {
                        origin: ChannelOrigin::Gate,
                        channel: ChannelSpec::ThermalRelaxation {
                            qubit: q,
                            params: *params,
                        },
                    });
                }
            }
            if gate_noise.depolarizing > 0.0 {
                noise.after.push(AttachedChannel {
                    origin: ChannelOrigin::Gate,
                    channel: ChannelSpec::Depolarizing {
                        qubits: inst.qubits.clone(),
                        weight: gate_noise.depolarizing,
                    },
                });
            }
        }
        for q in circuit.measured_qubits() {
            if let Some(&prev) = last_end.get(&q) {
                bound
                    .trailing
                    .extend(idle(q, prev, bound.schedule.duration));
            }
        }
        bound.readout = circuit
            .measured_qubits()
            .iter()
            .map(|q| self.readout.get(q).copied().unwrap_or(ReadoutError::NONE))
            .collect();
        bound.warnings = self.warnings.clone();
        Ok(bound)
    }

    /// JSON report of the circuit-independent channels.
    pub fn report(&self) -> serde_json::Value {
        let cx: Vec<serde_json::Value> = self
            .cx
            .iter()
            .map(|(&(d, t), n)| serde_json::json!({ "drive": d, "target": t, "noise": n }))
            .collect();
        let sq: Vec<serde_json::Value> = self
            .single_qubit
            .iter()
            .map(|(q, n)| serde_json::json!({ "qubit": q, "noise": n, "readout": self.readout[q] }))
            .collect();
        serde_json::json!({
            "single_qubit": sq,
            "cx": cx,
            "idle_relaxation": self.idle_relaxation,
            "warnings": self.warnings,
        })
    }
}

/// Rates used by the crosstalk-aware model for one table entry: the CX
/// average error and the spectator identity-gate error.
///
/// When the entry carries isolated rates, the measured simultaneous/isolated
/// ratio scales the calibrated CX error and the spectator receives the
/// excess of its simultaneous over its isolated rate. Otherwise the
/// simultaneous rates are used as they are.
pub fn effective_rates(rates: &CrosstalkRates, calibrated_cx_error: f64) -> (f64, f64) {
    let cx = match rates.cx_iso_error {
        Some(iso) if iso > 0.0 => (calibrated_cx_error * rates.cx_sim_error / iso).min(0.75),
        _ => rates.cx_sim_error,
    };
    let sq = match rates.sq_iso_error {
        Some(iso) => (rates.sq_sim_error - iso).max(0.0),
        None => rates.sq_sim_error,
    };
    (cx, sq.min(0.5))
}

/// Standard model bound to `circuit`, where every CX that starts while a
/// spectator of one of its triplets is active takes its error from the
/// table (the largest over active spectators) and each such spectator gets
/// an identity-gate depolarizing channel right after the CX's channels.
/// CX gates without table entries for their active spectators keep the
/// calibrated rates.
pub fn build_crosstalk_model(
    snapshot: &DeviceSnapshot,
    table: &CrosstalkTable,
    circuit: &Circuit,
) -> Result<BoundNoiseModel> {
    let standard = build_standard_model(snapshot);
    let mut bound = standard.bind(circuit, snapshot)?;
    let triplets = extract_triplets(snapshot);
    let hits: Vec<(usize, Vec<Triplet>)> = bound
        .cx_with_active_spectators(&triplets)
        .map(|(k, ts)| (k, ts.into_iter().copied().collect()))
        .collect();

    for (k, ts) in hits {
        let inst = &circuit.instructions()[k];
        let key = (inst.qubits[0], inst.qubits[1]);
        let gate_noise = &standard.cx[&key];
        let calibrated = snapshot.edge(key.0, key.1).expect("native edge").cx_error;
        let resolved: Vec<(usize, f64, f64)> = ts
            .iter()
            .filter_map(|t| {
                table
                    .get(t)
                    .map(|r| (t.spectator, effective_rates(r, calibrated)))
            })
            .map(|(s, (cx, sq))| (s, cx, sq))
            .collect();
        if resolved.is_empty() {
            continue;
        }
        let cx_rate = resolved.iter().map(|r| r.1).fold(0.0, f64::max);
        let (tuned, clamped) = GateNoise::tuned(gate_noise.relaxation.clone(), cx_rate);
        if clamped {
            bound.warnings.push(NoiseWarning {
                location: format!("instructions[{k}]"),
                message: format!("crosstalk CX rate {cx_rate} is below the relaxation floor"),
            });
        }
        let noise = &mut bound.instructions[k];
        noise
            .after
            .retain(|c| !matches!(c.channel, ChannelSpec::Depolarizing { .. }));
        if tuned.depolarizing > 0.0 {
            noise.after.push(AttachedChannel {
                origin: ChannelOrigin::Crosstalk,
                channel: ChannelSpec::Depolarizing {
                    qubits: inst.qubits.clone(),
                    weight: tuned.depolarizing,
                },
            });
        }
        for (s, _, sq) in resolved {
            let weight = rate_to_depol(sq, 1)?.lambda;
            if weight > 0.0 {
                noise.after.push(AttachedChannel {
                    origin: ChannelOrigin::Spectator,
                    channel: ChannelSpec::Depolarizing {
                        qubits: vec![s],
                        weight,
                    },
                });
            }
        }
    }
    Ok(bound)
}

/// Adds the ground-truth correlated depolarizing channel on (drive, target,
/// spectator) after every CX that fires while an injected spectator is
/// active.
pub fn inject_crosstalk(
    mut model: BoundNoiseModel,
    injection: &CrosstalkInjection,
) -> BoundNoiseModel {
    let triplets: Vec<Triplet> = injection
        .weights
        .iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|(t, _)| *t)
        .collect();
    if triplets.is_empty() {
        return model;
    }
    let hits: Vec<(usize, Vec<Triplet>)> = model
        .cx_with_active_spectators(&triplets)
        .map(|(k, ts)| (k, ts.into_iter().copied().collect()))
        .collect();
    for (k, ts) in hits {
        for t in ts {
            model.instructions[k].after.push(AttachedChannel {
                origin: ChannelOrigin::Injection,
                channel: ChannelSpec::Depolarizing {
                    qubits: t.qubits().to_vec(),
                    weight: injection.weights[&t],
                },
            });
        }
    }
    model
}
