use super::{Circuit, Gate, Instruction};
use crate::device::DeviceSnapshot;
use crate::{Error, Result};

/// Rewrites every CX against the calibrated orientation as
/// `H⊗H · CX(drive, target) · H⊗H`. Other instructions pass through.
pub fn map_to_native(circuit: &Circuit, snapshot: &DeviceSnapshot) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.num_qubits());
    for inst in circuit.instructions() {
        if inst.gate != Gate::CX {
            out.push(inst.clone())?;
            continue;
        }
        let (c, t) = (inst.qubits[0], inst.qubits[1]);
        let edge = snapshot.edge(c, t).ok_or(Error::NotAnEdge(c, t))?;
        if edge.drive == c {
            out.push(inst.clone())?;
        } else {
            out.add(Gate::H, &[t]).add(Gate::H, &[c]);
            out.push(Instruction {
                gate: Gate::CX,
                qubits: vec![t, c],
                frame: inst.frame,
            })?;
            out.add(Gate::H, &[t]).add(Gate::H, &[c]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{EdgeCalibration, QubitCalibration};

    fn device() -> DeviceSnapshot {
        let qubits = [0, 1, 4]
            .into_iter()
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
        let e = |d, t| EdgeCalibration {
            drive: d,
            target: t,
            cx_error: 0.0,
            cx_duration: 300.0,
        };
        DeviceSnapshot::new("t", "", qubits, vec![e(1, 4), e(1, 0)]).unwrap()
    }

    #[test]
    fn reversed_cx_gets_hadamard_wrappers() {
        let mut c = Circuit::new(5);
        c.add(Gate::CX, &[4, 1]);
        let n = map_to_native(&c, &device()).unwrap();
        let got: Vec<(Gate, Vec<usize>)> = n
            .instructions()
            .iter()
            .map(|i| (i.gate, i.qubits.clone()))
            .collect();
        assert_eq!(
            got,
            vec![
                (Gate::H, vec![1]),
                (Gate::H, vec![4]),
                (Gate::CX, vec![1, 4]),
                (Gate::H, vec![1]),
                (Gate::H, vec![4]),
            ]
        );
    }

    #[test]
    fn native_cx_unchanged() {
        let mut c = Circuit::new(5);
        c.add(Gate::X, &[0]).add(Gate::CX, &[1, 0]);
        assert_eq!(map_to_native(&c, &device()).unwrap(), c);
    }

    #[test]
    fn non_edge_rejected() {
        let mut c = Circuit::new(5);
        c.add(Gate::CX, &[0, 4]);
        assert!(matches!(
            map_to_native(&c, &device()),
            Err(Error::NotAnEdge(0, 4))
        ));
    }
}
