use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DensityMatrix;
use crate::rng;
use crate::{Error, Result};

/// Classical bit-flip probabilities of one qubit's readout.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError {
    pub p0_given_1: f64,
    pub p1_given_0: f64,
}

impl ReadoutError {
    pub const NONE: ReadoutError = ReadoutError {
        p0_given_1: 0.0,
        p1_given_0: 0.0,
    };
}

/// Outcome histogram keyed by bitstring, bit 0 rightmost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl Counts {
    /// From a histogram indexed by outcome value over `num_bits` bits.
    pub fn from_histogram(histogram: &[u64], num_bits: usize) -> Self {
        let counts = histogram
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (format!("{i:0num_bits$b}"), c))
            .collect();
        Self {
            shots: histogram.iter().sum(),
            counts,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Counts = serde_json::from_str(text).map_err(|e| Error::parse("counts JSON", e))?;
        let width = c.counts.keys().next().map_or(0, String::len);
        if width > 64 {
            return Err(Error::invariant("counts", "outcomes wider than 64 bits"));
        }
        for k in c.counts.keys() {
            if k.len() != width || !k.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::invariant(
                    "counts",
                    format!("malformed outcome {k:?}"),
                ));
            }
        }
        let total = c.counts.values().try_fold(0u64, |a, &v| a.checked_add(v));
        if total != Some(c.shots) {
            return Err(Error::invariant("shots", "counts do not sum to shots"));
        }
        Ok(c)
    }

    pub fn num_bits(&self) -> usize {
        self.counts.keys().next().map_or(0, String::len)
    }

    /// Histogram indexed by outcome value. Dense, so only for narrow
    /// registers.
    pub fn histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; 1 << self.num_bits()];
        for (k, &v) in &self.counts {
            h[usize::from_str_radix(k, 2).expect("validated bitstring")] += v;
        }
        h
    }

    /// Normalized outcome frequencies.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.shots.max(1) as f64;
        self.histogram()
            .into_iter()
            .map(|c| c as f64 / total)
            .collect()
    }

    /// Sums two histograms over the same outcome space.
    pub fn merge(&mut self, other: &Counts) {
        for (k, v) in &other.counts {
            *self.counts.entry(k.clone()).or_default() += v;
        }
        self.shots += other.shots;
    }
}

/// Applies independent bit-flip readout errors to an exact distribution.
pub fn apply_readout(probabilities: &[f64], readout: &[ReadoutError]) -> Vec<f64> {
    let mut p = probabilities.to_vec();
    for (bit, err) in readout.iter().enumerate() {
        if *err == ReadoutError::NONE {
            continue;
        }
        let m = 1usize << bit;
        for i in (0..p.len()).filter(|i| i & m == 0) {
            let (p0, p1) = (p[i], p[i | m]);
            p[i] = p0 * (1.0 - err.p1_given_0) + p1 * err.p0_given_1;
            p[i | m] = p1 * (1.0 - err.p0_given_1) + p0 * err.p1_given_0;
        }
    }
    p
}

/// Samples `shots` outcomes from `probabilities` (renormalized), then flips
/// each recorded bit independently according to `readout[bit]`.
pub fn sample_distribution(
    probabilities: &[f64],
    readout: &[ReadoutError],
    shots: u64,
    rng: &mut impl Rng,
) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probabilities.len());
    let mut acc = 0.0;
    for &p in probabilities {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let mut hist = vec![0u64; probabilities.len()];
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        let mut outcome = cdf
            .partition_point(|&c| c <= u)
            .min(probabilities.len() - 1);
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
        hist[outcome] += 1;
    }
    hist
}

/// Samples the diagonal of `state` with per-qubit readout errors;
/// deterministic for a given seed.
pub fn sample_counts(
    state: &DensityMatrix,
    shots: u64,
    readout: &[ReadoutError],
    seed: u64,
) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::Domain("shots must be positive".into()));
    }
    if readout.len() != state.num_qubits() {
        return Err(Error::Arity {
            expected: state.num_qubits(),
            actual: readout.len(),
        });
    }
    let mut rng = rng::stream(seed, "shots", &[]);
    let hist = sample_distribution(&state.probabilities(), readout, shots, &mut rng);
    Ok(Counts::from_histogram(&hist, state.num_qubits()))
}
