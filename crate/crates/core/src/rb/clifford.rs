use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use rand::Rng;

use crate::circuit::Gate;
use crate::simulator::{CliffordTableau, PauliString};

/// A Clifford element with a gate decomposition on local qubits `0..n`.
/// For two qubits, `CX` always acts as `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Clifford {
    pub tableau: CliffordTableau,
    pub gates: Vec<(Gate, Vec<usize>)>,
}

impl Clifford {
    pub fn num_qubits(&self) -> usize {
        self.tableau.num_qubits()
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|(g, _)| *g == Gate::CX).count()
    }
}

/// Every element of the one- or two-qubit Clifford group (global phase
/// dropped, Pauli signs kept), indexed by tableau.
pub struct CliffordGroup {
    elements: Vec<Clifford>,
    index: HashMap<CliffordTableau, usize>,
    /// Two-qubit only: symplectic parts, each shared by 16 sign patterns.
    symplectic: Vec<[u8; 4]>,
}

// Physical pulses dominate the cost, virtual Z rotations are nearly free and
// CX outweighs any number of single-qubit gates.
const COST_VIRTUAL: u64 = 1;
const COST_PULSE: u64 = 100;
const COST_CX: u64 = 100_000;

fn single_qubit_generators() -> Vec<(Gate, u64)> {
    vec![
        (Gate::SX, COST_PULSE),
        (Gate::H, COST_PULSE),
        (Gate::X, COST_PULSE),
        (Gate::Y, COST_PULSE),
        (Gate::RZ(FRAC_PI_2), COST_VIRTUAL),
        (Gate::RZ(-FRAC_PI_2), COST_VIRTUAL),
        (Gate::RZ(PI), COST_VIRTUAL),
    ]
}

/// Cheapest decomposition of every reachable element (Dijkstra over the
/// Cayley graph of the generator set; ties broken by discovery order).
fn enumerate(n: usize) -> Vec<Clifford> {
    let mut gens: Vec<(Gate, Vec<usize>, u64)> = Vec::new();
    for q in 0..n {
        for (g, c) in single_qubit_generators() {
            gens.push((g, vec![q], c));
        }
    }
    if n == 2 {
        gens.push((Gate::CX, vec![0, 1], COST_CX));
    }
    let start = CliffordTableau::identity(n);
    let mut best: HashMap<CliffordTableau, u64> = HashMap::from([(start.clone(), 0)]);
    let mut paths: HashMap<CliffordTableau, Vec<usize>> = HashMap::from([(start.clone(), vec![])]);
    let mut order: Vec<CliffordTableau> = Vec::new();
    let mut nodes = vec![start];
    let mut heap = BinaryHeap::from([Reverse((0u64, 0usize))]);
    let mut settled = std::collections::HashSet::new();
    while let Some(Reverse((cost, id))) = heap.pop() {
        let t = nodes[id].clone();
        if !settled.insert(t.clone()) {
            continue;
        }
        order.push(t.clone());
        for (k, (g, qs, c)) in gens.iter().enumerate() {
            let mut next = t.clone();
            next.apply(g, qs).expect("generators are Clifford");
            let nc = cost + c;
            if best.get(&next).is_none_or(|&b| nc < b) {
                best.insert(next.clone(), nc);
                let mut p = paths[&t].clone();
                p.push(k);
                paths.insert(next.clone(), p);
                nodes.push(next);
                heap.push(Reverse((nc, nodes.len() - 1)));
            }
        }
    }
    order
        .into_iter()
        .map(|t| {
            let gates = paths[&t]
                .iter()
                .map(|&k| (gens[k].0, gens[k].1.clone()))
                .collect();
            Clifford { tableau: t, gates }
        })
        .collect()
}

/// Symplectic bit vector of a two-qubit Pauli: `x0 x1 z0 z1`.
#[cfg(test)]
fn sym(p: &PauliString) -> u8 {
    (p.x as u8 & 3) | ((p.z as u8 & 3) << 2)
}

fn symplectic_form(a: u8, b: u8) -> u32 {
    ((a & 3 & (b >> 2)).count_ones() + ((a >> 2) & b & 3).count_ones()) % 2
}

/// All 720 elements of Sp(4, 2) as images of (X0, X1, Z0, Z1).
fn enumerate_sp4() -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    for code in 0u32..1 << 16 {
        let v = [0, 1, 2, 3].map(|i| (code >> (4 * i) & 15) as u8);
        let ok = (0..4)
            .all(|a| (a + 1..4).all(|b| symplectic_form(v[a], v[b]) == u32::from(b == a + 2)));
        if ok {
            out.push(v);
        }
    }
    out
}

impl CliffordGroup {
    fn build(n: usize) -> Self {
        let elements = enumerate(n);
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, c)| (c.tableau.clone(), i))
            .collect();
        let symplectic = if n == 2 { enumerate_sp4() } else { Vec::new() };
        Self {
            elements,
            index,
            symplectic,
        }
    }

    /// The 24-element single-qubit group.
    pub fn one_qubit() -> &'static CliffordGroup {
        static G: OnceLock<CliffordGroup> = OnceLock::new();
        G.get_or_init(|| Self::build(1))
    }

    /// The 11520-element two-qubit group.
    pub fn two_qubit() -> &'static CliffordGroup {
        static G: OnceLock<CliffordGroup> = OnceLock::new();
        G.get_or_init(|| Self::build(2))
    }

    pub fn for_qubits(n: usize) -> &'static CliffordGroup {
        match n {
            1 => Self::one_qubit(),
            2 => Self::two_qubit(),
            _ => panic!("Clifford groups are tabulated for 1 and 2 qubits only"),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Clifford] {
        &self.elements
    }

    pub fn index_of(&self, tableau: &CliffordTableau) -> Option<usize> {
        self.index.get(tableau).copied()
    }

    pub fn lookup(&self, tableau: &CliffordTableau) -> Option<&Clifford> {
        self.index_of(tableau).map(|i| &self.elements[i])
    }

    /// Uniform element. One qubit: uniform over the table. Two qubits: a
    /// uniform symplectic matrix and uniform signs on the four generator
    /// images, resolved to a decomposition through the table.
    pub fn sample(&self, rng: &mut impl Rng) -> &Clifford {
        if self.symplectic.is_empty() {
            return &self.elements[rng.gen_range(0..self.elements.len())];
        }
        let s = self.symplectic[rng.gen_range(0..self.symplectic.len())];
        let signs: u8 = rng.gen_range(0..16);
        let images: Vec<PauliString> = (0..4)
            .map(|k| {
                let v = s[k];
                let (x, z) = (u64::from(v & 3), u64::from(v >> 2));
                // Hermitian: i^{|x∧z|}, then the sampled sign.
                let phase = ((x & z).count_ones() as u8 + 2 * (signs >> k & 1)) & 3;
                PauliString { x, z, phase }
            })
            .collect();
        let t = CliffordTableau::from_images(2, images).expect("sampled images are symplectic");
        self.lookup(&t)
            .expect("symplectic construction lands in the group")
    }
}

/// Uniformly random one- or two-qubit Clifford.
pub fn sample_clifford(n: usize, rng: &mut impl Rng) -> &'static Clifford {
    CliffordGroup::for_qubits(n).sample(rng)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn group_orders() {
        assert_eq!(CliffordGroup::one_qubit().len(), 24);
        let g2 = CliffordGroup::two_qubit();
        assert_eq!(g2.len(), 11520);
        assert_eq!(g2.symplectic.len(), 720);
        // CX-count distribution of minimal decompositions.
        let mut hist = [0usize; 4];
        for c in g2.elements() {
            hist[c.cx_count()] += 1;
        }
        assert_eq!(hist, [576, 5184, 5184, 576]);
    }

    #[test]
    fn decompositions_reproduce_tableaus() {
        for n in 1..=2 {
            for c in CliffordGroup::for_qubits(n).elements() {
                let mut t = CliffordTableau::identity(n);
                for (g, q) in &c.gates {
                    t.apply(g, q).unwrap();
                }
                assert_eq!(t, c.tableau);
                assert!(t.is_symplectic());
            }
        }
    }

    #[test]
    fn one_qubit_sampling_is_uniform() {
        // Chi-square with 23 degrees of freedom; 0.1% critical value 49.7.
        let g = CliffordGroup::one_qubit();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 100_000;
        let mut counts = [0u64; 24];
        for _ in 0..draws {
            counts[g.index_of(&g.sample(&mut rng).tableau).unwrap()] += 1;
        }
        let expected = draws as f64 / 24.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 49.7, "chi2 = {chi2}");
        let sd = (expected * (1.0 - 1.0 / 24.0)).sqrt();
        assert!(counts
            .iter()
            .all(|&c| (c as f64 - expected).abs() < 4.0 * sd));
    }

    #[test]
    fn two_qubit_symplectic_part_is_uniform() {
        // Chi-square over the 720 symplectic classes; 719 dof, 0.1% critical
        // value about 847.
        let g = CliffordGroup::two_qubit();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let class: HashMap<[u8; 4], usize> = g
            .symplectic
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect();
        let draws = 144_000;
        let mut counts = vec![0u64; 720];
        for _ in 0..draws {
            let t = &g.sample(&mut rng).tableau;
            let key = [0, 1, 2, 3].map(|k| sym(&t.images()[k]));
            counts[class[&key]] += 1;
        }
        let expected = draws as f64 / 720.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 847.0, "chi2 = {chi2}");
    }

    #[test]
    fn products_stay_in_group() {
        let g = CliffordGroup::two_qubit();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let a = g.sample(&mut rng).tableau.clone();
            let b = g.sample(&mut rng).tableau.clone();
            let p = a.then(&b);
            assert!(p.is_symplectic());
            assert!(g.index_of(&p).is_some());
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = sample_clifford(1, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_clifford(1, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
