use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{active_qubits, schedule, Circuit, Gate, Instruction};
use crate::device::{DeviceSnapshot, Triplet};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Symplectic bits `(x, z)`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn gate(self) -> Gate {
        match self {
            Pauli::I => Gate::I,
            Pauli::X => Gate::X,
            Pauli::Y => Gate::Y,
            Pauli::Z => Gate::Z,
        }
    }

    fn sample(rng: &mut impl Rng) -> Self {
        Self::ALL[rng.gen_range(0..4)]
    }
}

/// `CX · (control ⊗ target) · CX†` up to phase, as `(control, target)`.
pub fn cx_conjugate(control: Pauli, target: Pauli) -> (Pauli, Pauli) {
    let (xc, zc) = control.bits();
    let (xt, zt) = target.bits();
    (Pauli::from_bits(xc, zc ^ zt), Pauli::from_bits(xt ^ xc, zt))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwirlInsertion {
    /// Index of the CX in the input circuit.
    pub instruction: usize,
    pub control: usize,
    pub target: usize,
    pub prefix: (Pauli, Pauli),
    pub suffix: (Pauli, Pauli),
    /// Active spectators and the Pauli applied before and after the CX.
    pub spectators: Vec<(usize, Pauli)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwirlRecord {
    pub seed: u64,
    pub insertions: Vec<TwirlInsertion>,
}

/// Pauli-twirls every CX of a native circuit.
///
/// Before each CX a uniformly random pair `(P_c, P_t)` is inserted and
/// after it the pair `CX·(P_c⊗P_t)·CX†`, so the block equals the CX up to a
/// global phase. Each spectator of the CX's triplets that is active when
/// the CX starts receives a random `P` before and the same `P` after.
/// Inserted gates are frame instructions: zero duration and noiseless.
/// CX `k` draws from its own stream, so records are stable under edits
/// elsewhere in the circuit.
pub fn randomized_compile(
    circuit: &Circuit,
    snapshot: &DeviceSnapshot,
    triplets: &[Triplet],
    seed: u64,
) -> Result<(Circuit, TwirlRecord)> {
    let sched = schedule(circuit, snapshot)?;
    let mut out = Circuit::new(circuit.num_qubits());
    let mut record = TwirlRecord {
        seed,
        insertions: Vec::new(),
    };
    let mut cx_index = 0u64;

    for (idx, inst) in circuit.instructions().iter().enumerate() {
        if inst.gate != Gate::CX {
            out.push(inst.clone())?;
            continue;
        }
        let (c, t) = (inst.qubits[0], inst.qubits[1]);
        let native = snapshot.edges.iter().any(|e| e.drive == c && e.target == t);
        if !native {
            return Err(Error::invariant(
                format!("instructions[{idx}]"),
                format!("CX({c}, {t}) is not in native orientation"),
            ));
        }
        let mut rng = rng::stream(seed, "twirl", &[cx_index]);
        cx_index += 1;

        let prefix = (Pauli::sample(&mut rng), Pauli::sample(&mut rng));
        let suffix = cx_conjugate(prefix.0, prefix.1);
        let active = active_qubits(&sched, sched.items[idx].start);
        let mut spectators: Vec<usize> = triplets
            .iter()
            .filter(|tr| tr.drive == c && tr.target == t && active.contains(&tr.spectator))
            .map(|tr| tr.spectator)
            .collect();
        spectators.sort_unstable();
        spectators.dedup();
        let spectators: Vec<(usize, Pauli)> = spectators
            .into_iter()
            .map(|s| (s, Pauli::sample(&mut rng)))
            .collect();

        let frame = |q: usize, p: Pauli, out: &mut Circuit| -> Result<()> {
            if p != Pauli::I {
                out.push(Instruction::frame(p.gate(), q))?;
            }
            Ok(())
        };
        frame(c, prefix.0, &mut out)?;
        frame(t, prefix.1, &mut out)?;
        for &(s, p) in &spectators {
            frame(s, p, &mut out)?;
        }
        out.push(inst.clone())?;
        frame(c, suffix.0, &mut out)?;
        frame(t, suffix.1, &mut out)?;
        for &(s, p) in &spectators {
            frame(s, p, &mut out)?;
        }
        record.insertions.push(TwirlInsertion {
            instruction: idx,
            control: c,
            target: t,
            prefix,
            suffix,
            spectators,
        });
    }
    Ok((out, record))
}
