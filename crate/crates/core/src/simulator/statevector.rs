use num_complex::Complex64 as C;

use super::gate_matrix;
use crate::circuit::Circuit;
use crate::{Error, Result};

pub const MAX_STATEVECTOR_QUBITS: usize = 14;

/// Noiseless final state of `circuit` from `|0…0⟩`. Barriers, delays and
/// measurements are ignored.
pub fn exact_statevector(circuit: &Circuit) -> Result<Vec<C>> {
    let n = circuit.num_qubits();
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::SizeLimit {
            what: "exact distribution",
            qubits: n,
            limit: MAX_STATEVECTOR_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut psi = vec![C::default(); dim];
    psi[0] = C::new(1.0, 0.0);
    for inst in circuit.instructions() {
        let Some(u) = gate_matrix(&inst.gate) else {
            continue;
        };
        let k = inst.qubits.len();
        let offs: Vec<usize> = (0..1usize << k)
            .map(|a| {
                (0..k)
                    .filter(|&j| a >> j & 1 == 1)
                    .map(|j| 1usize << inst.qubits[j])
                    .sum()
            })
            .collect();
        let mask: usize = inst.qubits.iter().map(|&q| 1usize << q).sum();
        let mut v = vec![C::default(); offs.len()];
        for base in (0..dim).filter(|i| i & mask == 0) {
            for (a, &o) in offs.iter().enumerate() {
                v[a] = psi[base | o];
            }
            for (a, &o) in offs.iter().enumerate() {
                psi[base | o] = (0..offs.len()).map(|b| u[(a, b)] * v[b]).sum();
            }
        }
    }
    Ok(psi)
}

/// Computational-basis distribution of the noiseless output state, indexed
/// by outcome value (qubit 0 = least-significant bit).
pub fn exact_distribution(circuit: &Circuit) -> Result<Vec<f64>> {
    Ok(exact_statevector(circuit)?
        .iter()
        .map(C::norm_sqr)
        .collect())
}
