use num_complex::Complex64 as C;
use serde::Serialize;

use crate::circuit::Gate;
use crate::simulator::{gate_matrix, CMatrix, TOL_ALGEBRAIC};
use crate::{Error, Result};

/// Completely positive, trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    arity: usize,
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    /// Validates operator dimensions and `Σ E†E = I`.
    pub fn new(arity: usize, operators: Vec<CMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::Domain(
                "a channel needs at least one Kraus operator".into(),
            ));
        }
        if let Some(bad) = operators.iter().find(|e| e.dim() != 1 << arity) {
            return Err(Error::Arity {
                expected: arity,
                actual: bad.arity().unwrap_or(0),
            });
        }
        let ch = Self { arity, operators };
        let err = ch.cptp_error();
        if err > TOL_ALGEBRAIC {
            return Err(Error::Domain(format!(
                "Kraus operators violate completeness by {err:.2e}"
            )));
        }
        Ok(ch)
    }

    pub fn identity(arity: usize) -> Self {
        Self {
            arity,
            operators: vec![CMatrix::identity(1 << arity)],
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        let arity = u
            .arity()
            .ok_or_else(|| Error::Domain("dimension is not a power of two".into()))?;
        Self::new(arity, vec![u])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// Largest entry of `Σ E†E − I`.
    pub fn cptp_error(&self) -> f64 {
        let dim = 1 << self.arity;
        let sum = self
            .operators
            .iter()
            .fold(CMatrix::zeros(dim), |acc, e| &acc + &(&e.dagger() * e));
        sum.max_abs_diff(&CMatrix::identity(dim))
    }

    /// `next ∘ self` on the same qubits.
    pub fn then(&self, next: &KrausChannel) -> KrausChannel {
        assert_eq!(self.arity, next.arity, "channel arity mismatch");
        let operators = next
            .operators
            .iter()
            .flat_map(|b| self.operators.iter().map(move |a| b * a))
            .collect();
        KrausChannel {
            arity: self.arity,
            operators,
        }
    }

    /// `self ⊗ high`, with `self` on the low-order qubits.
    pub fn tensor(&self, high: &KrausChannel) -> KrausChannel {
        let operators = high
            .operators
            .iter()
            .flat_map(|b| self.operators.iter().map(move |a| a.tensor(b)))
            .collect();
        KrausChannel {
            arity: self.arity + high.arity,
            operators,
        }
    }

    /// `Σ_k E_k ρ E_k†` on a full matrix of the channel's dimension.
    pub fn apply_to(&self, rho: &CMatrix) -> CMatrix {
        let dim = rho.dim();
        self.operators.iter().fold(CMatrix::zeros(dim), |acc, e| {
            &acc + &(&(e * rho) * &e.dagger())
        })
    }

    /// Entanglement fidelity `Σ_k |Tr E_k|² / d²`.
    pub fn entanglement_fidelity(&self) -> f64 {
        let d = (1usize << self.arity) as f64;
        self.operators
            .iter()
            .map(|e| e.trace().norm_sqr())
            .sum::<f64>()
            / (d * d)
    }

    /// Haar-averaged state fidelity `(d·F_e + 1)/(d + 1)`.
    pub fn average_fidelity(&self) -> f64 {
        let d = (1usize << self.arity) as f64;
        (d * self.entanglement_fidelity() + 1.0) / (d + 1.0)
    }

    pub fn average_error(&self) -> f64 {
        1.0 - self.average_fidelity()
    }
}

/// Decay probabilities of the combined amplitude/phase damping channel for
/// an interval of `duration` nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalRelaxationParams {
    pub t1: f64,
    pub t2: f64,
    pub duration: f64,
    pub p_ad: f64,
    pub p_pd: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl ThermalRelaxationParams {
    /// `t1`, `t2` in microseconds, `duration` in nanoseconds. Infinite
    /// times are allowed and mean no decay.
    pub fn new(t1: f64, t2: f64, duration: f64) -> Result<Self> {
        if !(t1 > 0.0) || !(t2 > 0.0) || t2 > 2.0 * t1 {
            return Err(Error::Domain(format!(
                "need t1 > 0 and 0 < t2 <= 2 t1, got t1={t1}, t2={t2}"
            )));
        }
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::Domain(format!(
                "duration {duration} ns must be finite and >= 0"
            )));
        }
        let t_us = duration / 1000.0;
        let keep_1 = (-t_us / t1).exp();
        let keep_coh = (-t_us / t2).exp();
        let p_ad = 1.0 - keep_1;
        // sqrt((1-p_AD)(1-p_PD)) = e^{-t/T2}
        let p_pd = if keep_1 > 0.0 {
            (1.0 - keep_coh * keep_coh / keep_1).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok(Self {
            t1,
            t2,
            duration,
            p_ad,
            p_pd,
            gamma: p_ad,
            lambda: (1.0 - p_ad) * p_pd,
        })
    }

    /// Kraus set `diag(1, √(1−γ−λ))`, `√γ|0⟩⟨1|`, `√λ|1⟩⟨1|`.
    pub fn channel(&self) -> KrausChannel {
        let z = C::default();
        let r = |v: f64| C::new(v.max(0.0).sqrt(), 0.0);
        let e0 = CMatrix::from_rows(&[
            &[C::new(1.0, 0.0), z],
            &[z, r(1.0 - self.gamma - self.lambda)],
        ]);
        let e1 = CMatrix::from_rows(&[&[z, r(self.gamma)], &[z, z]]);
        let e2 = CMatrix::from_rows(&[&[z, z], &[z, r(self.lambda)]]);
        let mut operators = vec![e0];
        if self.gamma > 0.0 {
            operators.push(e1);
        }
        if self.lambda > 0.0 {
            operators.push(e2);
        }
        KrausChannel {
            arity: 1,
            operators,
        }
    }
}

/// Thermal relaxation over `duration` ns for the given `t1`, `t2` (µs).
pub fn thermal_relaxation(t1: f64, t2: f64, duration: f64) -> Result<KrausChannel> {
    Ok(ThermalRelaxationParams::new(t1, t2, duration)?.channel())
}

/// Amplitude damping with decay probability `p`.
pub fn amplitude_damping(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "damping probability {p} outside [0, 1]"
        )));
    }
    let z = C::default();
    let e0 = CMatrix::from_rows(&[&[C::new(1.0, 0.0), z], &[z, C::new((1.0 - p).sqrt(), 0.0)]]);
    let e1 = CMatrix::from_rows(&[&[z, C::new(p.sqrt(), 0.0)], &[z, z]]);
    KrausChannel::new(1, vec![e0, e1])
}

/// Phase damping with probability `p`.
pub fn phase_damping(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "damping probability {p} outside [0, 1]"
        )));
    }
    let z = C::default();
    let e0 = CMatrix::from_rows(&[&[C::new(1.0, 0.0), z], &[z, C::new((1.0 - p).sqrt(), 0.0)]]);
    let e1 = CMatrix::from_rows(&[&[z, z], &[z, C::new(p.sqrt(), 0.0)]]);
    KrausChannel::new(1, vec![e0, e1])
}

/// Pauli string on `arity` qubits; digit `j` (base 4) of `index` selects
/// I, X, Y, Z on qubit `j`.
pub fn pauli_operator(arity: usize, index: usize) -> CMatrix {
    let single = |k: usize| match k {
        0 => CMatrix::identity(2),
        1 => gate_matrix(&Gate::X).unwrap(),
        2 => gate_matrix(&Gate::Y).unwrap(),
        _ => gate_matrix(&Gate::Z).unwrap(),
    };
    (1..arity).fold(single(index & 3), |acc, j| {
        acc.tensor(&single(index >> (2 * j) & 3))
    })
}

/// Depolarizing channel with per-Pauli probability `p`:
/// `√(1−(4^a−1)p)·I` plus `√p·P` for every nontrivial Pauli `P`.
pub fn depolarizing(arity: usize, p: f64) -> Result<KrausChannel> {
    let paulis = 1usize << (2 * arity);
    if !(p >= 0.0) || p * paulis as f64 > 1.0 + TOL_ALGEBRAIC {
        return Err(Error::Domain(format!(
            "per-Pauli probability {p} outside [0, 4^-{arity}]"
        )));
    }
    let keep = (1.0 - (paulis - 1) as f64 * p).max(0.0);
    let mut operators = vec![CMatrix::identity(1 << arity).scale(C::new(keep.sqrt(), 0.0))];
    if p > 0.0 {
        for k in 1..paulis {
            operators.push(pauli_operator(arity, k).scale(C::new(p.sqrt(), 0.0)));
        }
    }
    KrausChannel::new(arity, operators)
}
