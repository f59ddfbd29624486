use num_complex::Complex64 as C;

use super::{gate_matrix, CMatrix, TOL_PSD, TOL_STATE};
use crate::circuit::Gate;
use crate::noise::KrausChannel;
use crate::{Error, Result};

/// Largest register held as a dense density matrix (2^24 entries).
pub const MAX_DENSE_QUBITS: usize = 12;

/// Dense `2^n × 2^n` density matrix, row-major. Qubit `q` is bit `q` of
/// the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C>,
}

/// Index offsets of the `2^k` basis states over `qubits`, plus the mask.
fn offsets(qubits: &[usize]) -> (Vec<usize>, usize) {
    let k = qubits.len();
    let offs = (0..1usize << k)
        .map(|a| {
            (0..k)
                .filter(|&j| a >> j & 1 == 1)
                .map(|j| 1usize << qubits[j])
                .sum()
        })
        .collect();
    (offs, qubits.iter().map(|&q| 1usize << q).sum())
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|` on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n > MAX_DENSE_QUBITS {
            return Err(Error::SizeLimit {
                what: "density matrix",
                qubits: n,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << n;
        let mut data = vec![C::default(); dim * dim];
        data[0] = C::new(1.0, 0.0);
        Ok(Self { n, data })
    }

    /// Wraps a `2^n × 2^n` matrix after checking the state invariants.
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let n = m
            .arity()
            .ok_or_else(|| Error::Domain("dimension is not a power of two".into()))?;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::SizeLimit {
                what: "density matrix",
                qubits: n,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let rho = Self {
            n,
            data: m.data().to_vec(),
        };
        rho.check_invariants()?;
        Ok(rho)
    }

    /// Pure state `|ψ⟩⟨ψ|` from amplitudes (normalized here).
    pub fn from_pure(amplitudes: &[C]) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::Domain(
                "amplitude count is not a power of two".into(),
            ));
        }
        let norm = amplitudes.iter().map(C::norm_sqr).sum::<f64>().sqrt();
        let mut data = vec![C::default(); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = amplitudes[r] * amplitudes[c].conj() / (norm * norm);
            }
        }
        Ok(Self {
            n: dim.trailing_zeros() as usize,
            data,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, r: usize, c: usize) -> C {
        self.data[r * self.dim() + c]
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = self.dim();
        let rows: Vec<&[C]> = self.data.chunks(dim).collect();
        CMatrix::from_rows(&rows)
    }

    pub fn trace(&self) -> C {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Diagonal in the computational basis, clamped at zero.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.get(i, i).re.max(0.0))
            .collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()) * 0.5
        });
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermitian, unit trace and positive semidefinite within the global
    /// tolerance ladder.
    pub fn check_invariants(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > TOL_STATE {
            return Err(Error::invariant(
                "density matrix",
                format!("not Hermitian ({h:.2e})"),
            ));
        }
        let t = self.trace();
        if (t - C::new(1.0, 0.0)).norm() > TOL_STATE {
            return Err(Error::invariant(
                "density matrix",
                format!("trace {t} != 1"),
            ));
        }
        let e = self.min_eigenvalue();
        if e < -TOL_PSD {
            return Err(Error::invariant(
                "density matrix",
                format!("negative eigenvalue {e:.2e}"),
            ));
        }
        Ok(())
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n || qubits[..i].contains(&q) {
                return Err(Error::invariant(
                    "qubits",
                    format!("bad target {q} for {} qubits", self.n),
                ));
            }
        }
        Ok(())
    }

    /// `ρ ← A·ρ` for an operator `A` on `qubits`.
    fn left_multiply(data: &mut [C], dim: usize, op: &CMatrix, qubits: &[usize]) {
        let (offs, mask) = offsets(qubits);
        let k = offs.len();
        let mut v = vec![C::default(); k];
        for base in (0..dim).filter(|i| i & mask == 0) {
            for c in 0..dim {
                for a in 0..k {
                    v[a] = data[(base | offs[a]) * dim + c];
                }
                for a in 0..k {
                    let mut acc = C::default();
                    for b in 0..k {
                        acc += op[(a, b)] * v[b];
                    }
                    data[(base | offs[a]) * dim + c] = acc;
                }
            }
        }
    }

    /// `ρ ← ρ·A†`.
    fn right_multiply_dagger(data: &mut [C], dim: usize, op: &CMatrix, qubits: &[usize]) {
        let (offs, mask) = offsets(qubits);
        let k = offs.len();
        let mut v = vec![C::default(); k];
        for r in 0..dim {
            let row = &mut data[r * dim..(r + 1) * dim];
            for base in (0..dim).filter(|i| i & mask == 0) {
                for a in 0..k {
                    v[a] = row[base | offs[a]];
                }
                for a in 0..k {
                    let mut acc = C::default();
                    for b in 0..k {
                        acc += v[b] * op[(a, b)].conj();
                    }
                    row[base | offs[a]] = acc;
                }
            }
        }
    }

    /// `ρ ← A ρ A†`.
    pub fn conjugate_by(&mut self, op: &CMatrix, qubits: &[usize]) -> Result<()> {
        self.check_qubits(qubits)?;
        if op.dim() != 1 << qubits.len() {
            return Err(Error::Arity {
                expected: qubits.len(),
                actual: op.arity().unwrap_or(0),
            });
        }
        let dim = self.dim();
        Self::left_multiply(&mut self.data, dim, op, qubits);
        Self::right_multiply_dagger(&mut self.data, dim, op, qubits);
        Ok(())
    }

    /// `ρ ← Σ_k E_k ρ E_k†`.
    pub fn apply_kraus(&mut self, channel: &KrausChannel, qubits: &[usize]) -> Result<()> {
        if channel.arity() != qubits.len() {
            return Err(Error::Arity {
                expected: channel.arity(),
                actual: qubits.len(),
            });
        }
        self.check_qubits(qubits)?;
        let ops = channel.operators();
        if let [single] = ops {
            return self.conjugate_by(single, qubits);
        }
        let dim = self.dim();
        let mut acc = vec![C::default(); dim * dim];
        let mut tmp = self.data.clone();
        for (i, e) in ops.iter().enumerate() {
            if i > 0 {
                tmp.copy_from_slice(&self.data);
            }
            Self::left_multiply(&mut tmp, dim, e, qubits);
            Self::right_multiply_dagger(&mut tmp, dim, e, qubits);
            for (a, t) in acc.iter_mut().zip(&tmp) {
                *a += t;
            }
        }
        self.data = acc;
        Ok(())
    }

    /// `ρ ← (1−λ)ρ + λ·Tr_S(ρ) ⊗ I_S/d_S` over the qubits `S`. Equivalent
    /// to the depolarizing Kraus form with total weight `λ`, without the
    /// `4^|S|` operator sum.
    pub fn depolarize(&mut self, qubits: &[usize], weight: f64) -> Result<()> {
        self.check_qubits(qubits)?;
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Domain(format!(
                "depolarizing weight {weight} outside [0, 1]"
            )));
        }
        if weight == 0.0 {
            return Ok(());
        }
        let dim = self.dim();
        let (offs, mask) = offsets(qubits);
        let d_s = offs.len() as f64;
        let outer: Vec<usize> = (0..dim).filter(|i| i & mask == 0).collect();
        for &ro in &outer {
            for &co in &outer {
                let reduced: C = offs
                    .iter()
                    .map(|&o| self.data[(ro | o) * dim + (co | o)])
                    .sum();
                let add = reduced * (weight / d_s);
                for &a in &offs {
                    for &b in &offs {
                        let v = &mut self.data[(ro | a) * dim + (co | b)];
                        *v *= 1.0 - weight;
                        if a == b {
                            *v += add;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Marginal probabilities of `qubits` (bit `j` of the result index is
    /// `qubits[j]`).
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, p) in self.probabilities().into_iter().enumerate() {
            let idx: usize = qubits
                .iter()
                .enumerate()
                .map(|(j, &q)| (i >> q & 1) << j)
                .sum();
            out[idx] += p;
        }
        out
    }
}

/// `ρ → UρU†` for a unitary gate.
pub fn apply_gate(state: &mut DensityMatrix, gate: &Gate, qubits: &[usize]) -> Result<()> {
    let u = gate_matrix(gate).ok_or_else(|| Error::UnsupportedGate {
        gate: gate.name().into(),
    })?;
    if u.dim() != 1 << qubits.len() {
        return Err(Error::Arity {
            expected: u.arity().unwrap(),
            actual: qubits.len(),
        });
    }
    state.conjugate_by(&u, qubits)
}

/// `ρ → Σ_k E_k ρ E_k†` on `qubits`.
pub fn apply_channel(
    state: &mut DensityMatrix,
    channel: &KrausChannel,
    qubits: &[usize],
) -> Result<()> {
    state.apply_kraus(channel, qubits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{amplitude_damping, depolarizing};

    fn basis(n: usize, idx: usize) -> DensityMatrix {
        let mut amps = vec![C::default(); 1 << n];
        amps[idx] = C::new(1.0, 0.0);
        DensityMatrix::from_pure(&amps).unwrap()
    }

    #[test]
    fn x_flips_zero() {
        let mut rho = DensityMatrix::zero_state(1).unwrap();
        apply_gate(&mut rho, &Gate::X, &[0]).unwrap();
        assert_eq!(rho, basis(1, 1));
    }

    #[test]
    fn hadamard_gives_uniform_entries() {
        let mut rho = DensityMatrix::zero_state(1).unwrap();
        apply_gate(&mut rho, &Gate::H, &[0]).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!((rho.get(r, c) - C::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cx_with_control_set() {
        // control = qubit 0 set, target = qubit 1 clear.
        let mut rho = basis(2, 0b01);
        apply_gate(&mut rho, &Gate::CX, &[0, 1]).unwrap();
        assert_eq!(rho, basis(2, 0b11));
        let mut rho = basis(2, 0b10);
        apply_gate(&mut rho, &Gate::CX, &[1, 0]).unwrap();
        assert_eq!(rho, basis(2, 0b11));
    }

    #[test]
    fn non_unitary_gates_rejected() {
        let mut rho = DensityMatrix::zero_state(1).unwrap();
        for g in [Gate::Measure, Gate::Barrier, Gate::Delay(10.0)] {
            assert!(matches!(
                apply_gate(&mut rho, &g, &[0]),
                Err(Error::UnsupportedGate { .. })
            ));
        }
    }

    #[test]
    fn identity_channel_and_full_depolarization() {
        let mut rho = DensityMatrix::zero_state(1).unwrap();
        apply_gate(&mut rho, &Gate::H, &[0]).unwrap();
        let before = rho.clone();
        apply_channel(&mut rho, &depolarizing(1, 0.0).unwrap(), &[0]).unwrap();
        assert!(rho.to_matrix().max_abs_diff(&before.to_matrix()) < 1e-15);
        apply_channel(&mut rho, &depolarizing(1, 0.25).unwrap(), &[0]).unwrap();
        let half = CMatrix::identity(2).scale(C::new(0.5, 0.0));
        assert!(rho.to_matrix().max_abs_diff(&half) < 1e-12);
    }

    #[test]
    fn complete_amplitude_damping() {
        let mut rho = basis(1, 1);
        apply_channel(&mut rho, &amplitude_damping(1.0).unwrap(), &[0]).unwrap();
        assert!(rho.to_matrix().max_abs_diff(&basis(1, 0).to_matrix()) < 1e-15);
    }

    #[test]
    fn arity_mismatch() {
        let mut rho = DensityMatrix::zero_state(2).unwrap();
        assert!(matches!(
            apply_channel(&mut rho, &depolarizing(2, 0.01).unwrap(), &[0]),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn fast_depolarizing_matches_kraus_form() {
        let mut rho = DensityMatrix::zero_state(3).unwrap();
        for (g, q) in [
            (Gate::H, vec![0]),
            (Gate::CX, vec![0, 2]),
            (Gate::SX, vec![1]),
            (Gate::RZ(0.4), vec![2]),
        ] {
            apply_gate(&mut rho, &g, &q).unwrap();
        }
        let mut a = rho.clone();
        let mut b = rho;
        a.depolarize(&[2, 0], 0.3).unwrap();
        b.apply_kraus(&depolarizing(2, 0.3 / 16.0).unwrap(), &[2, 0])
            .unwrap();
        assert!(a.to_matrix().max_abs_diff(&b.to_matrix()) < 1e-14);
    }

    #[test]
    fn size_limit() {
        assert!(matches!(
            DensityMatrix::zero_state(13),
            Err(Error::SizeLimit { .. })
        ));
    }
}
