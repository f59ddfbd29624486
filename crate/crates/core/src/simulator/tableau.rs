use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::circuit::{Circuit, Gate};
use crate::{Error, Result};

/// Largest register a tableau supports (bit-packed in `u64`).
const MAX_TABLEAU_QUBITS: usize = 32;

/// `i^phase · Π_j X_j^{x_j} Z_j^{z_j}`, with the X factor of each qubit
/// written before its Z factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
    pub phase: u8,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString {
        x: 0,
        z: 0,
        phase: 0,
    };

    pub fn x(q: usize) -> Self {
        Self {
            x: 1 << q,
            z: 0,
            phase: 0,
        }
    }

    pub fn z(q: usize) -> Self {
        Self {
            x: 0,
            z: 1 << q,
            phase: 0,
        }
    }

    /// Hermitian `Y_q = i X_q Z_q`.
    pub fn y(q: usize) -> Self {
        Self {
            x: 1 << q,
            z: 1 << q,
            phase: 1,
        }
    }

    pub fn with_phase(self, phase: u8) -> Self {
        Self {
            phase: phase & 3,
            ..self
        }
    }

    /// `self · other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let swaps = (self.z & other.x).count_ones() as u8;
        PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + 2 * (swaps & 1)) & 3,
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Hermitian Paulis carry a real sign.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as u32 + (self.x & self.z).count_ones()).is_multiple_of(2)
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }
}

/// Clifford unitary `U` stored as its action on the Pauli generators:
/// entry `j < n` holds `U X_j U†`, entry `n + j` holds `U Z_j U†`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    n: usize,
    images: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        assert!(
            n <= MAX_TABLEAU_QUBITS,
            "tableau limited to {MAX_TABLEAU_QUBITS} qubits"
        );
        let images = (0..n)
            .map(PauliString::x)
            .chain((0..n).map(PauliString::z))
            .collect();
        Self { n, images }
    }

    /// Tableau from the images of `X_0 … X_{n−1}, Z_0 … Z_{n−1}`.
    pub fn from_images(n: usize, images: Vec<PauliString>) -> Result<Self> {
        if images.len() != 2 * n || n > MAX_TABLEAU_QUBITS {
            return Err(Error::Arity {
                expected: 2 * n,
                actual: images.len(),
            });
        }
        let t = Self { n, images };
        if !t.is_symplectic() {
            return Err(Error::invariant(
                "tableau",
                "images violate the symplectic condition",
            ));
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn images(&self) -> &[PauliString] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Tableau of a single gate on an `n`-qubit register. RZ is accepted
    /// for multiples of π/2 only.
    pub fn from_gate(n: usize, gate: &Gate, qubits: &[usize]) -> Result<Self> {
        let mut t = Self::identity(n);
        t.apply(gate, qubits)?;
        Ok(t)
    }

    /// Tableau of all unitary instructions in `circuit`; barriers, delays
    /// and measurements are skipped.
    pub fn from_circuit(circuit: &Circuit) -> Result<Self> {
        let mut t = Self::identity(circuit.num_qubits());
        for inst in circuit.instructions() {
            if inst.gate.is_unitary() {
                t.apply(&inst.gate, &inst.qubits)?;
            }
        }
        Ok(t)
    }

    /// `U P U†` for a Pauli string `P`.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        let mut out = PauliString::IDENTITY.with_phase(p.phase);
        for j in 0..self.n {
            if p.x >> j & 1 == 1 {
                out = out.mul(&self.images[j]);
            }
            if p.z >> j & 1 == 1 {
                out = out.mul(&self.images[self.n + j]);
            }
        }
        out
    }

    /// Tableau of `self · first`, i.e. `first` applied before `self`.
    pub fn after(&self, first: &CliffordTableau) -> CliffordTableau {
        assert_eq!(self.n, first.n);
        CliffordTableau {
            n: self.n,
            images: first.images.iter().map(|p| self.conjugate(p)).collect(),
        }
    }

    /// Tableau of `next · self`, i.e. `next` applied after `self`.
    pub fn then(&self, next: &CliffordTableau) -> CliffordTableau {
        next.after(self)
    }

    /// Appends a gate (`self ← G · self`).
    pub fn apply(&mut self, gate: &Gate, qubits: &[usize]) -> Result<()> {
        for &q in qubits {
            if q >= self.n {
                return Err(Error::invariant(
                    "qubits",
                    format!("qubit {q} outside {}-qubit tableau", self.n),
                ));
            }
        }
        let a = qubits[0];
        let bit = |p: &PauliString, q: usize| (p.x >> q & 1 == 1, p.z >> q & 1 == 1);
        for p in &mut self.images {
            let (x, z) = bit(p, a);
            // Per-gate single-qubit action on (x, z) with the sign picked
            // up, written as a phase increment in units of i.
            let (nx, nz, dphase) = match gate {
                Gate::I => (x, z, 0),
                Gate::X => (x, z, if z { 2 } else { 0 }),
                Gate::Z => (x, z, if x { 2 } else { 0 }),
                Gate::Y => (x, z, if x ^ z { 2 } else { 0 }),
                // H: X -> Z, Z -> X, XZ -> ZX = -XZ
                Gate::H => (z, x, if x && z { 2 } else { 0 }),
                // S: X -> iXZ, Z -> Z
                Gate::S => (x, z ^ x, if x { 1 } else { 0 }),
                Gate::Sdg => (x, z ^ x, if x { 3 } else { 0 }),
                // SX: X -> X, Z -> -i·XZ (= -Y)
                Gate::SX => (x ^ z, z, if z { 3 } else { 0 }),
                Gate::RZ(theta) => {
                    let k = (theta / FRAC_PI_2).round();
                    if (theta - k * FRAC_PI_2).abs() > 1e-9 {
                        return Err(Error::UnsupportedGate {
                            gate: gate.to_string(),
                        });
                    }
                    match (k as i64).rem_euclid(4) {
                        0 => (x, z, 0),
                        1 => (x, z ^ x, if x { 1 } else { 0 }),
                        2 => (x, z, if x { 2 } else { 0 }),
                        _ => (x, z ^ x, if x { 3 } else { 0 }),
                    }
                }
                Gate::CX => {
                    let t = qubits[1];
                    let (_, zt) = bit(p, t);
                    // X_c -> X_c X_t, Z_t -> Z_c Z_t. On X/Z monomials the
                    // reordering involves only commuting factors: no sign.
                    p.x ^= u64::from(x) << t;
                    p.z ^= u64::from(zt) << a;
                    continue;
                }
                Gate::Barrier | Gate::Delay(_) | Gate::Measure => {
                    return Err(Error::UnsupportedGate {
                        gate: gate.name().into(),
                    })
                }
            };
            p.x = (p.x & !(1 << a)) | (u64::from(nx) << a);
            p.z = (p.z & !(1 << a)) | (u64::from(nz) << a);
            p.phase = (p.phase + dphase) & 3;
        }
        Ok(())
    }

    /// Inverse Clifford: symplectic part by GF(2) elimination, phases fixed
    /// so that `inverse · self` is the identity.
    pub fn inverse(&self) -> CliffordTableau {
        let n = self.n;
        let vec = |p: &PauliString| p.x | (p.z << n);
        // Row k: image of generator k, augmented with the unit vector e_k.
        let mut rows: Vec<(u64, u64)> = self
            .images
            .iter()
            .enumerate()
            .map(|(k, p)| (vec(p), 1u64 << k))
            .collect();
        for col in 0..2 * n {
            let pivot = (col..2 * n)
                .find(|&r| rows[r].0 >> col & 1 == 1)
                .expect("tableau is invertible");
            rows.swap(col, pivot);
            let (pv, pa) = rows[col];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != col && row.0 >> col & 1 == 1 {
                    row.0 ^= pv;
                    row.1 ^= pa;
                }
            }
        }
        let mask = if n == 0 { 0 } else { (1u64 << n) - 1 };
        let images = (0..2 * n)
            .map(|j| {
                let coeffs = rows[j].1;
                let mut p = PauliString {
                    x: coeffs & mask,
                    z: coeffs >> n,
                    phase: 0,
                };
                let image = self.conjugate(&p);
                // `U P U† = i^f g_j`; choose the phase of P to cancel it.
                p.phase = (4 - image.phase) & 3;
                p
            })
            .collect();
        CliffordTableau { n, images }
    }

    /// Symplectic condition: images of X_j, Z_j pairwise commute except the
    /// conjugate pair, and all images are Hermitian.
    pub fn is_symplectic(&self) -> bool {
        let n = self.n;
        for a in 0..2 * n {
            if !self.images[a].is_hermitian() {
                return false;
            }
            for b in a + 1..2 * n {
                let conjugate_pair = b == a + n && a < n;
                if self.images[a].commutes_with(&self.images[b]) == conjugate_pair {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for CliffordTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, p) in self.images.iter().enumerate() {
            let gen = if k < self.n { 'X' } else { 'Z' };
            let sign = match (p.phase + 4 - ((p.x & p.z).count_ones() % 4) as u8) & 3 {
                0 => "+",
                2 => "-",
                1 => "+i",
                _ => "-i",
            };
            write!(f, "{gen}{} -> {sign}", k % self.n.max(1))?;
            for q in 0..self.n {
                f.write_str(match (p.x >> q & 1, p.z >> q & 1) {
                    (0, 0) => "I",
                    (1, 0) => "X",
                    (1, 1) => "Y",
                    _ => "Z",
                })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The Clifford `C` with `C · (s_k ⋯ s_1 s_0) = I` for a sequence applied
/// in order `s_0, s_1, …`.
pub fn clifford_inverse(sequence: &[CliffordTableau]) -> CliffordTableau {
    assert!(
        !sequence.is_empty(),
        "clifford_inverse needs a nonempty sequence"
    );
    let total = sequence[1..]
        .iter()
        .fold(sequence[0].clone(), |acc, c| acc.then(c));
    total.inverse()
}
