use serde::{Deserialize, Serialize};

use super::DeviceSnapshot;
use crate::{Error, Result};

/// Whether a chain and its reversal count as one layout or two.
///
/// A chain layout places logical qubit `i` on `chain[i]`, so the two
/// orientations of the same path are physically different placements. The
/// 132 eight-qubit layouts of the 27-qubit heavy-hexagon device are the
/// 66 undirected paths taken in both orientations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainOrientation {
    #[default]
    Directed,
    /// Keep only the lexicographically smaller orientation.
    Undirected,
}

/// All simple paths with `length` vertices in the coupling graph, sorted.
pub fn enumerate_chains(
    snapshot: &DeviceSnapshot,
    length: usize,
    orientation: ChainOrientation,
) -> Result<Vec<Vec<usize>>> {
    if length == 0 || length > snapshot.num_qubits() {
        return Err(Error::Domain(format!(
            "chain length {length} must lie in 1..={}",
            snapshot.num_qubits()
        )));
    }
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(length);
    for start in snapshot.qubit_ids() {
        path.push(start);
        extend(snapshot, length, &mut path, &mut out);
        path.pop();
    }
    if orientation == ChainOrientation::Undirected {
        out.retain(|p| {
            let rev: Vec<usize> = p.iter().rev().copied().collect();
            *p <= rev
        });
    }
    out.sort_unstable();
    Ok(out)
}

fn extend(
    snapshot: &DeviceSnapshot,
    length: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if path.len() == length {
        out.push(path.clone());
        return;
    }
    let last = *path.last().unwrap();
    for n in snapshot.neighbors(last) {
        if !path.contains(&n) {
            path.push(n);
            extend(snapshot, length, path, out);
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{EdgeCalibration, QubitCalibration};

    fn device(n: usize, edges: &[(usize, usize)]) -> DeviceSnapshot {
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
    fn path_graph_full_length() {
        let snap = device(3, &[(0, 1), (1, 2)]);
        let u = enumerate_chains(&snap, 3, ChainOrientation::Undirected).unwrap();
        assert_eq!(u, vec![vec![0, 1, 2]]);
        let d = enumerate_chains(&snap, 3, ChainOrientation::Directed).unwrap();
        assert_eq!(d, vec![vec![0, 1, 2], vec![2, 1, 0]]);
    }

    #[test]
    fn four_cycle_edges() {
        let snap = device(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let u = enumerate_chains(&snap, 2, ChainOrientation::Undirected).unwrap();
        assert_eq!(u.len(), 4);
        assert_eq!(
            enumerate_chains(&snap, 2, ChainOrientation::Directed)
                .unwrap()
                .len(),
            8
        );
    }

    #[test]
    fn single_vertices() {
        let snap = device(3, &[(0, 1), (1, 2)]);
        for o in [ChainOrientation::Directed, ChainOrientation::Undirected] {
            assert_eq!(
                enumerate_chains(&snap, 1, o).unwrap(),
                vec![vec![0], vec![1], vec![2]]
            );
        }
    }

    #[test]
    fn length_out_of_range() {
        let snap = device(3, &[(0, 1), (1, 2)]);
        assert!(enumerate_chains(&snap, 0, ChainOrientation::Directed).is_err());
        assert!(enumerate_chains(&snap, 4, ChainOrientation::Directed).is_err());
    }
}
