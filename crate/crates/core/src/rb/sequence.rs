use serde::{Deserialize, Serialize};

use super::clifford::{Clifford, CliffordGroup};
use crate::circuit::{Circuit, Gate, Instruction};
use crate::device::{Batch, Triplet};
use crate::rng;
use crate::simulator::{clifford_inverse, CliffordTableau};
use crate::{Error, Result};

/// Sequence lengths, repetitions per length, shots per circuit and seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RBConfig {
    pub lengths: Vec<usize>,
    pub repetitions: usize,
    pub shots: u64,
    pub seed: u64,
}

impl RBConfig {
    /// Nine lengths up to 175, five repetitions, 10⁴ shots.
    pub fn paper(seed: u64) -> Self {
        Self {
            lengths: vec![1, 3, 10, 20, 40, 65, 95, 130, 175],
            repetitions: 5,
            shots: 10_000,
            seed,
        }
    }

    /// Small preset for quick runs and CI.
    pub fn desk(seed: u64) -> Self {
        Self {
            lengths: vec![1, 5, 20, 60],
            repetitions: 3,
            shots: 2000,
            seed,
        }
    }

    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        match name {
            "paper" => Some(Self::paper(seed)),
            "desk" => Some(Self::desk(seed)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty()
            || self.lengths[0] < 1
            || self.lengths.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::invariant(
                "lengths",
                "must be nonempty, >= 1 and strictly increasing",
            ));
        }
        if self.repetitions < 1 {
            return Err(Error::invariant("repetitions", "must be >= 1"));
        }
        if self.shots < 1 {
            return Err(Error::invariant("shots", "must be >= 1"));
        }
        Ok(())
    }
}

/// One RB circuit and its place in the experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RBCircuit {
    pub length: usize,
    pub repetition: usize,
    pub circuit: Circuit,
}

/// `length` random Cliffords on `qubits` followed by the inverting element.
/// The stream depends only on the seed, the target qubits, the length and
/// the repetition, so isolated and simultaneous experiments on the same
/// targets see identical sequences.
pub fn clifford_sequence(
    qubits: &[usize],
    length: usize,
    repetition: usize,
    seed: u64,
) -> Vec<&'static Clifford> {
    let group = CliffordGroup::for_qubits(qubits.len());
    let mut idx: Vec<u64> = qubits.iter().map(|&q| q as u64).collect();
    idx.extend([length as u64, repetition as u64]);
    let mut rng = rng::stream(seed, "rb.sequence", &idx);
    let mut seq: Vec<&'static Clifford> = (0..length).map(|_| group.sample(&mut rng)).collect();
    let tableaus: Vec<CliffordTableau> = seq.iter().map(|c| c.tableau.clone()).collect();
    let inverse = clifford_inverse(&tableaus);
    seq.push(group.lookup(&inverse).expect("inverse is a group element"));
    seq
}

fn emit(circuit: &mut Circuit, clifford: &Clifford, qubits: &[usize]) -> Result<()> {
    for (g, local) in &clifford.gates {
        let physical: Vec<usize> = local.iter().map(|&l| qubits[l]).collect();
        circuit.push(Instruction::new(*g, physical))?;
    }
    Ok(())
}

fn check_targets(qubits: &[usize], width: usize) -> Result<()> {
    if qubits.is_empty() || qubits.len() > 2 {
        return Err(Error::Domain(format!(
            "RB targets must be 1 or 2 qubits, got {}",
            qubits.len()
        )));
    }
    if qubits.iter().any(|&q| q >= width) || (qubits.len() == 2 && qubits[0] == qubits[1]) {
        return Err(Error::invariant(
            "qubits",
            format!("invalid RB targets {qubits:?}"),
        ));
    }
    Ok(())
}

/// Isolated RB on one qubit or one pair (`[drive, target]`). Each Clifford
/// layer, including the final inverse, is closed by a barrier over the
/// targets; the targets are measured in the given order.
pub fn build_rb_circuits(
    qubits: &[usize],
    width: usize,
    config: &RBConfig,
) -> Result<Vec<RBCircuit>> {
    config.validate()?;
    check_targets(qubits, width)?;
    let mut out = Vec::new();
    for &length in &config.lengths {
        for repetition in 0..config.repetitions {
            let mut c = Circuit::new(width);
            for cl in clifford_sequence(qubits, length, repetition, config.seed) {
                emit(&mut c, cl, qubits)?;
                c.push(Instruction::new(Gate::Barrier, qubits.to_vec()))?;
            }
            for &q in qubits {
                c.add(Gate::Measure, &[q]);
            }
            out.push(RBCircuit {
                length,
                repetition,
                circuit: c,
            });
        }
    }
    Ok(out)
}

/// Simultaneous RB of all triplets of a batch in the same circuits: per
/// triplet, two-qubit RB on (drive, target) next to single-qubit RB on the
/// spectator, with a barrier over `[drive, target, spectator]` after every
/// layer. Triplet `i` is measured into bits `3i` (drive), `3i + 1`
/// (target) and `3i + 2` (spectator).
pub fn build_batch_rb(batch: &Batch, width: usize, config: &RBConfig) -> Result<Vec<RBCircuit>> {
    config.validate()?;
    for t in &batch.triplets {
        check_targets(&[t.drive, t.target], width)?;
        check_targets(&[t.spectator], width)?;
    }
    let mut out = Vec::new();
    for &length in &config.lengths {
        for repetition in 0..config.repetitions {
            let seqs: Vec<(Vec<&Clifford>, Vec<&Clifford>)> = batch
                .triplets
                .iter()
                .map(|t| {
                    (
                        clifford_sequence(&[t.drive, t.target], length, repetition, config.seed),
                        clifford_sequence(&[t.spectator], length, repetition, config.seed),
                    )
                })
                .collect();
            let mut c = Circuit::new(width);
            for layer in 0..=length {
                for (t, (pair, spec)) in batch.triplets.iter().zip(&seqs) {
                    emit(&mut c, pair[layer], &[t.drive, t.target])?;
                    emit(&mut c, spec[layer], &[t.spectator])?;
                    c.push(Instruction::new(Gate::Barrier, t.qubits().to_vec()))?;
                }
            }
            for t in &batch.triplets {
                for q in t.qubits() {
                    c.add(Gate::Measure, &[q]);
                }
            }
            out.push(RBCircuit {
                length,
                repetition,
                circuit: c,
            });
        }
    }
    Ok(out)
}

/// Simultaneous RB for a single triplet.
pub fn build_simultaneous_rb(
    triplet: &Triplet,
    width: usize,
    config: &RBConfig,
) -> Result<Vec<RBCircuit>> {
    build_batch_rb(
        &Batch {
            triplets: vec![*triplet],
        },
        width,
        config,
    )
}
