//! Virtual backend: executes circuits on a calibration snapshot under a
//! configurable noise stack.

use std::collections::BTreeMap;

use rand::Rng;

use crate::circuit::{map_to_native, Circuit};
use crate::device::DeviceSnapshot;
use crate::noise::{
    build_crosstalk_model, build_standard_model, inject_crosstalk, BoundNoiseModel, ChannelOrigin,
    CrosstalkInjection, CrosstalkTable, NoisyOp,
};
use crate::rng;
use crate::simulator::{
    apply_gate, apply_readout, Counts, DensityMatrix, ReadoutError, MAX_DENSE_QUBITS,
};
use crate::{Error, Result};

/// Widest measured register whose joint distribution is materialized.
pub const MAX_MEASURED_BITS: usize = 20;

/// Widest measured register that can be sampled.
pub const MAX_SAMPLED_BITS: usize = 64;

/// Gate-level noise the backend starts from.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum BaseNoise {
    #[default]
    Ideal,
    /// Calibration-driven noise model.
    Standard,
    /// Calibration-driven model with crosstalk-aware CX and spectator
    /// channels from a characterized table.
    CrosstalkAware(CrosstalkTable),
}

/// Full noise configuration of a [`VirtualBackend`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BackendNoise {
    pub base: BaseNoise,
    /// Thermal relaxation over idle intervals (ignored for `Ideal`).
    pub idle_relaxation: bool,
    /// Classical readout bit flips (ignored for `Ideal`).
    pub readout: bool,
    /// Ground-truth correlated crosstalk.
    pub injection: Option<CrosstalkInjection>,
    /// Depolarizing per Clifford layer, `(one-qubit rate, two-qubit rate)`,
    /// attached at barriers.
    pub clifford_layers: Option<(f64, f64)>,
}

impl BackendNoise {
    pub fn ideal() -> Self {
        Self::default()
    }

    /// Standard calibration noise with idle relaxation and readout.
    pub fn standard() -> Self {
        Self {
            base: BaseNoise::Standard,
            idle_relaxation: true,
            readout: true,
            ..Self::default()
        }
    }

    pub fn crosstalk_aware(table: CrosstalkTable) -> Self {
        Self {
            base: BaseNoise::CrosstalkAware(table),
            idle_relaxation: true,
            readout: true,
            ..Self::default()
        }
    }

    /// Only per-Clifford depolarizing noise.
    pub fn clifford_depolarizing(one_qubit: f64, two_qubit: f64) -> Self {
        Self {
            clifford_layers: Some((one_qubit, two_qubit)),
            ..Self::default()
        }
    }

    pub fn with_injection(mut self, injection: CrosstalkInjection) -> Self {
        self.injection = Some(injection);
        self
    }
}

#[derive(Debug, Clone)]
pub struct VirtualBackend {
    pub snapshot: DeviceSnapshot,
    pub noise: BackendNoise,
}

impl VirtualBackend {
    pub fn new(snapshot: DeviceSnapshot, noise: BackendNoise) -> Self {
        Self { snapshot, noise }
    }

    /// Maps `circuit` to native CX orientation and binds the configured
    /// noise to its schedule.
    pub fn bind(&self, circuit: &Circuit) -> Result<BoundNoiseModel> {
        let native = map_to_native(circuit, &self.snapshot)?;
        let mut bound = match &self.noise.base {
            BaseNoise::Ideal => BoundNoiseModel::noiseless(&native, &self.snapshot)?,
            BaseNoise::Standard => {
                build_standard_model(&self.snapshot).bind(&native, &self.snapshot)?
            }
            BaseNoise::CrosstalkAware(table) => {
                build_crosstalk_model(&self.snapshot, table, &native)?
            }
        };
        if !self.noise.idle_relaxation {
            for n in &mut bound.instructions {
                n.before.retain(|c| c.origin != ChannelOrigin::Idle);
                n.after.retain(|c| c.origin != ChannelOrigin::Idle);
            }
            bound.trailing.clear();
        }
        if !self.noise.readout {
            bound
                .readout
                .iter_mut()
                .for_each(|r| *r = Default::default());
        }
        if let Some(inj) = &self.noise.injection {
            bound = inject_crosstalk(bound, inj);
        }
        if let Some((r1, r2)) = self.noise.clifford_layers {
            bound.attach_clifford_layers(r1, r2)?;
        }
        Ok(bound)
    }

    /// Exact outcome distribution over the measured bits (bit `i` is the
    /// `i`-th MEASURE), readout error included.
    pub fn exact(&self, circuit: &Circuit) -> Result<Vec<f64>> {
        let bound = self.bind(circuit)?;
        Ok(apply_readout(&simulate(&bound)?, &bound.readout))
    }

    /// `shots` samples of the measured bits; deterministic per seed.
    pub fn run(&self, circuit: &Circuit, shots: u64, seed: u64) -> Result<Counts> {
        if shots == 0 {
            return Err(Error::Domain("shots must be positive".into()));
        }
        let bound = self.bind(circuit)?;
        let m = bound.readout.len();
        if m > MAX_SAMPLED_BITS {
            return Err(Error::SizeLimit {
                what: "sampled register",
                qubits: m,
                limit: MAX_SAMPLED_BITS,
            });
        }
        let components = simulate_components(&bound)?;
        let mut rng = rng::stream(seed, "backend.shots", &[]);
        Ok(sample_components(
            &components,
            &bound.readout,
            shots,
            &mut rng,
        ))
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Joint distribution of a subset of measured bits.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMarginal {
    /// Measured-bit indices; bit `j` of an index into `probabilities` is
    /// measured bit `bits[j]`.
    pub bits: Vec<usize>,
    pub probabilities: Vec<f64>,
}

/// Pre-readout marginals of the measured bits, one per independent
/// component.
///
/// Qubits are split into the connected components of the interaction
/// graph of the noisy program; each component holding a measured qubit is
/// simulated as its own density matrix. The measured bits are independent
/// across components.
pub fn simulate_components(bound: &BoundNoiseModel) -> Result<Vec<ComponentMarginal>> {
    let program = bound.program();
    let measured = bound.circuit.measured_qubits();
    let m = measured.len();
    let n = bound.circuit.num_qubits();
    let mut parent: Vec<usize> = (0..n).collect();
    for op in &program {
        let qs = op.qubits();
        for &q in &qs[1..] {
            let (a, b) = (find(&mut parent, qs[0]), find(&mut parent, q));
            parent[a] = b;
        }
    }

    let mut out = Vec::new();
    let mut done = vec![false; n];
    for &root_q in &measured {
        let root = find(&mut parent, root_q);
        if done[root] {
            continue;
        }
        done[root] = true;
        let members: Vec<usize> = (0..n).filter(|&q| find(&mut parent, q) == root).collect();
        if members.len() > MAX_DENSE_QUBITS {
            return Err(Error::SizeLimit {
                what: "connected component",
                qubits: members.len(),
                limit: MAX_DENSE_QUBITS,
            });
        }
        let mut local = vec![usize::MAX; n];
        for (i, &q) in members.iter().enumerate() {
            local[q] = i;
        }
        let mut rho = DensityMatrix::zero_state(members.len())?;
        let map = |qs: &[usize]| qs.iter().map(|&q| local[q]).collect::<Vec<_>>();
        for op in &program {
            if local[op.qubits()[0]] == usize::MAX {
                continue;
            }
            match op {
                NoisyOp::Unitary { gate, qubits } => apply_gate(&mut rho, gate, &map(qubits))?,
                NoisyOp::Kraus { channel, qubits } => rho.apply_kraus(channel, &map(qubits))?,
                NoisyOp::Depolarize { qubits, weight } => rho.depolarize(&map(qubits), *weight)?,
            }
        }
        let bits: Vec<usize> = (0..m)
            .filter(|&i| local[measured[i]] != usize::MAX)
            .collect();
        let probabilities = rho
            .marginal_probabilities(&bits.iter().map(|&i| local[measured[i]]).collect::<Vec<_>>());
        out.push(ComponentMarginal {
            bits,
            probabilities,
        });
    }
    Ok(out)
}

/// Pre-readout joint distribution of the measured bits (bit `i` is the
/// `i`-th MEASURE).
pub fn simulate(bound: &BoundNoiseModel) -> Result<Vec<f64>> {
    let m = bound.circuit.measured_qubits().len();
    if m > MAX_MEASURED_BITS {
        return Err(Error::SizeLimit {
            what: "measured register",
            qubits: m,
            limit: MAX_MEASURED_BITS,
        });
    }
    let mut dist = vec![1.0; 1 << m];
    for c in simulate_components(bound)? {
        for (outcome, p) in dist.iter_mut().enumerate() {
            let idx: usize = c
                .bits
                .iter()
                .enumerate()
                .map(|(j, &b)| (outcome >> b & 1) << j)
                .sum();
            *p *= c.probabilities[idx];
        }
    }
    Ok(dist)
}

/// Samples each component independently and applies per-bit readout
/// flips. Registers up to 64 bits.
fn sample_components(
    components: &[ComponentMarginal],
    readout: &[ReadoutError],
    shots: u64,
    rng: &mut impl Rng,
) -> Counts {
    let cdfs: Vec<Vec<f64>> = components
        .iter()
        .map(|c| {
            c.probabilities
                .iter()
                .scan(0.0, |acc, &p| {
                    *acc += p.max(0.0);
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..shots {
        let mut outcome = 0u64;
        for (c, cdf) in components.iter().zip(&cdfs) {
            let total = *cdf.last().expect("component has outcomes");
            let u = rng.gen::<f64>() * total;
            let local = cdf.partition_point(|&x| x <= u).min(cdf.len() - 1);
            for (j, &b) in c.bits.iter().enumerate() {
                outcome |= ((local >> j & 1) as u64) << b;
            }
        }
        for (bit, err) in readout.iter().enumerate() {
            let flip = if outcome >> bit & 1 == 1 {
                err.p0_given_1
            } else {
                err.p1_given_0
            };
            if flip > 0.0 && rng.gen::<f64>() < flip {
                outcome ^= 1 << bit;
            }
        }
        *hist.entry(outcome).or_default() += 1;
    }
    let width = readout.len();
    Counts {
        shots,
        counts: hist
            .into_iter()
            .map(|(k, v)| (format!("{k:0width$b}"), v))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::fixtures::ehningen;
    use crate::simulator::exact_distribution;

    #[test]
    fn ideal_backend_matches_exact_distribution() {
        let snap = ehningen();
        let mut c = Circuit::new(snap.width());
        c.add(Gate::H, &[1])
            .add(Gate::CX, &[1, 4])
            .add(Gate::CX, &[4, 7])
            .add(Gate::H, &[20]);
        for q in [1, 4, 7, 20] {
            c.add(Gate::Measure, &[q]);
        }
        let backend = VirtualBackend::new(snap, BackendNoise::ideal());
        let got = backend.exact(&c).unwrap();

        let mut small = Circuit::new(4);
        small
            .add(Gate::H, &[0])
            .add(Gate::CX, &[0, 1])
            .add(Gate::CX, &[1, 2])
            .add(Gate::H, &[3]);
        let want = exact_distribution(&small).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_order_defines_bits() {
        let snap = ehningen();
        let mut c = Circuit::new(snap.width());
        c.add(Gate::X, &[5])
            .add(Gate::Measure, &[3])
            .add(Gate::Measure, &[5]);
        let backend = VirtualBackend::new(snap, BackendNoise::ideal());
        assert_eq!(backend.exact(&c).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        let counts = backend.run(&c, 10, 1).unwrap();
        assert_eq!(counts.counts["10"], 10);
    }

    #[test]
    fn wide_registers_are_sampled_per_component() {
        let snap = ehningen();
        let mut c = Circuit::new(snap.width());
        for q in (0..27).step_by(2) {
            c.add(Gate::X, &[q]);
        }
        c.add(Gate::H, &[1]).measure_all();
        let backend = VirtualBackend::new(snap, BackendNoise::ideal());
        assert!(backend.exact(&c).is_err());
        let counts = backend.run(&c, 400, 3).unwrap();
        assert_eq!(counts.num_bits(), 27);
        let mut heads = 0;
        for (k, &n) in &counts.counts {
            let bits: Vec<char> = k.chars().rev().collect();
            for q in (0..27).step_by(2) {
                assert_eq!(bits[q], '1');
            }
            if bits[1] == '1' {
                heads += n;
            }
        }
        assert!((150..250).contains(&heads), "{heads}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let snap = ehningen();
        let mut c = Circuit::new(snap.width());
        c.add(Gate::H, &[0])
            .add(Gate::CX, &[0, 1])
            .add(Gate::Measure, &[0])
            .add(Gate::Measure, &[1]);
        let backend = VirtualBackend::new(snap, BackendNoise::standard());
        assert_eq!(
            backend.run(&c, 1000, 7).unwrap(),
            backend.run(&c, 1000, 7).unwrap()
        );
        let p = backend.exact(&c).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[1] > 0.0 && p[2] > 0.0);
    }
}
