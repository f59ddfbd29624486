use std::ops::{Add, Mul};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::circuit::Gate;

/// Small dense square complex matrix, row-major.
///
/// For an operator on qubits `[q0, q1, …]`, bit `j` of a row/column index
/// refers to `q_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C::default(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[C]]) -> Self {
        let dim = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == dim),
            "square matrix expected"
        );
        Self {
            dim,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn from_real(dim: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), dim * dim);
        Self {
            dim,
            data: values.iter().map(|&v| C::new(v, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits, if the dimension is a power of two.
    pub fn arity(&self) -> Option<usize> {
        self.dim
            .is_power_of_two()
            .then(|| self.dim.trailing_zeros() as usize)
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> C {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `self` on the low bits, `high` on the high bits (`high ⊗ self`).
    pub fn tensor(&self, high: &CMatrix) -> Self {
        let dim = self.dim * high.dim;
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = self[(r % self.dim, c % self.dim)] * high[(r / self.dim, c / self.dim)];
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Distance to `other` after removing the best global phase.
    pub fn phase_insensitive_diff(&self, other: &CMatrix) -> f64 {
        let overlap: C = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| b.conj() * a)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            C::new(1.0, 0.0)
        };
        self.max_abs_diff(&other.scale(phase))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C;
    fn index(&self, (r, c): (usize, usize)) -> &C {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut m = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == C::default() {
                    continue;
                }
                for c in 0..n {
                    m.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        m
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Unitary of a gate, or `None` for barriers, delays and measurements.
/// CX acts on `[control, target]` with the control on bit 0.
pub fn gate_matrix(gate: &Gate) -> Option<CMatrix> {
    let o = C::new(1.0, 0.0);
    let z = C::default();
    let i = C::new(0.0, 1.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Some(match *gate {
        Gate::I => CMatrix::identity(2),
        Gate::X => CMatrix::from_rows(&[&[z, o], &[o, z]]),
        Gate::Y => CMatrix::from_rows(&[&[z, -i], &[i, z]]),
        Gate::Z => CMatrix::from_rows(&[&[o, z], &[z, -o]]),
        Gate::H => CMatrix::from_real(2, &[h, h, h, -h]),
        Gate::S => CMatrix::from_rows(&[&[o, z], &[z, i]]),
        Gate::Sdg => CMatrix::from_rows(&[&[o, z], &[z, -i]]),
        Gate::SX => {
            let (a, b) = (C::new(0.5, 0.5), C::new(0.5, -0.5));
            CMatrix::from_rows(&[&[a, b], &[b, a]])
        }
        Gate::RZ(t) => CMatrix::from_rows(&[
            &[C::from_polar(1.0, -t / 2.0), z],
            &[z, C::from_polar(1.0, t / 2.0)],
        ]),
        Gate::CX => {
            let mut m = CMatrix::zeros(4);
            for col in 0..4usize {
                let row = if col & 1 == 1 { col ^ 2 } else { col };
                m[(row, col)] = o;
            }
            m
        }
        Gate::Barrier | Gate::Delay(_) | Gate::Measure => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_matrices_are_unitary() {
        for g in [
            Gate::I,
            Gate::X,
            Gate::Y,
            Gate::Z,
            Gate::H,
            Gate::S,
            Gate::Sdg,
            Gate::SX,
            Gate::RZ(0.7),
            Gate::CX,
        ] {
            let u = gate_matrix(&g).unwrap();
            let prod = &u * &u.dagger();
            assert!(
                prod.max_abs_diff(&CMatrix::identity(u.dim())) < 1e-15,
                "{g}"
            );
        }
        assert!(gate_matrix(&Gate::Barrier).is_none());
    }

    #[test]
    fn sx_squares_to_x_and_rz_matches_s() {
        let sx = gate_matrix(&Gate::SX).unwrap();
        assert!((&sx * &sx).max_abs_diff(&gate_matrix(&Gate::X).unwrap()) < 1e-15);
        let rz = gate_matrix(&Gate::RZ(std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(rz.phase_insensitive_diff(&gate_matrix(&Gate::S).unwrap()) < 1e-15);
    }

    #[test]
    fn tensor_ordering() {
        // X on the low bit maps |00> to |01> (index 1).
        let x = gate_matrix(&Gate::X).unwrap();
        let m = x.tensor(&CMatrix::identity(2));
        assert_eq!(m[(1, 0)], C::new(1.0, 0.0));
        assert_eq!(m[(2, 0)], C::default());
    }
}
