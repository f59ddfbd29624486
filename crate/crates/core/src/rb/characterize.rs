use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::{build_batch_rb, build_rb_circuits, fit_decay, DecayFit, RBCircuit, RBConfig, RBPoint};
use crate::backend::VirtualBackend;
use crate::device::{validate_batches, Batch, BatchViolation, Triplet};
use crate::noise::{CrosstalkRates, CrosstalkTable};
use crate::rng;
use crate::simulator::Counts;
use crate::{Error, Result};

/// Survival points of one RB subsystem and their decay fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RBCurve {
    pub qubits: Vec<usize>,
    pub points: Vec<RBPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RBCurve {
    fn new(qubits: Vec<usize>, points: Vec<RBPoint>) -> Self {
        let d = 1usize << qubits.len();
        let (fit, error) = match fit_decay(&points, d) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            qubits,
            points,
            fit,
            error,
        }
    }

    pub fn rate(&self) -> Option<f64> {
        self.fit.map(|f| f.r)
    }
}

/// RB curves for one triplet, simultaneous and isolated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripletResult {
    pub triplet: Triplet,
    pub batch: usize,
    pub pair_simultaneous: RBCurve,
    pub spectator_simultaneous: RBCurve,
    pub pair_isolated: RBCurve,
    pub spectator_isolated: RBCurve,
}

/// Outcome of a full-device characterization run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Characterization {
    pub config: RBConfig,
    /// How survivals were obtained.
    pub survival_source: &'static str,
    pub triplets: Vec<TripletResult>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub table: CrosstalkTable,
}

const SURVIVAL_SOURCE: &str =
    "pair and spectator survivals are marginals of the same shots of one simultaneous batch circuit";

/// Fraction of shots with every bit in `bits` equal to 0.
pub fn marginal_survival(counts: &Counts, bits: &[usize]) -> f64 {
    let zero: u64 = counts
        .counts
        .iter()
        .filter(|(k, _)| {
            let k = k.as_bytes();
            bits.iter().all(|&b| k[k.len() - 1 - b] == b'0')
        })
        .map(|(_, &c)| c)
        .sum();
    zero as f64 / counts.shots as f64
}

/// Survival samples of `bits` per (length, repetition), grouped into points.
fn points(
    config: &RBConfig,
    circuits: &[RBCircuit],
    counts: &[Counts],
    bits: &[usize],
) -> Vec<RBPoint> {
    config
        .lengths
        .iter()
        .map(|&m| {
            let samples: Vec<f64> = circuits
                .iter()
                .zip(counts)
                .filter(|(c, _)| c.length == m)
                .map(|(_, k)| marginal_survival(k, bits))
                .collect();
            RBPoint::from_samples(m, &samples)
        })
        .collect()
}

fn run_all(
    backend: &VirtualBackend,
    circuits: &[RBCircuit],
    shots: u64,
    seed: u64,
    key: &[u64],
) -> Result<Vec<Counts>> {
    circuits
        .par_iter()
        .map(|rb| {
            let mut idx = key.to_vec();
            idx.extend([rb.length as u64, rb.repetition as u64]);
            backend.run(&rb.circuit, shots, rng::derive_seed(seed, "rb.shots", &idx))
        })
        .collect()
}

/// Isolated RB on `qubits` (one or two) and its decay fit.
pub fn run_rb(backend: &VirtualBackend, qubits: &[usize], config: &RBConfig) -> Result<RBCurve> {
    config.validate()?;
    let circuits = build_rb_circuits(qubits, backend.snapshot.width(), config)?;
    let key: Vec<u64> = [0]
        .into_iter()
        .chain(qubits.iter().map(|&q| q as u64 + 1))
        .collect();
    let counts = run_all(backend, &circuits, config.shots, config.seed, &key)?;
    let bits: Vec<usize> = (0..qubits.len()).collect();
    Ok(RBCurve::new(
        qubits.to_vec(),
        points(config, &circuits, &counts, &bits),
    ))
}

/// Simultaneous RB of every batch plus isolated RB of every pair and
/// spectator involved, fitted into a [`CrosstalkTable`]. Triplets whose
/// simultaneous fits fail are left out of the table and reported in
/// `warnings`.
pub fn characterize(
    backend: &VirtualBackend,
    batches: &[Batch],
    config: &RBConfig,
) -> Result<Characterization> {
    config.validate()?;
    let snapshot = &backend.snapshot;
    let width = snapshot.width();
    let problems: Vec<BatchViolation> = validate_batches(batches, snapshot)
        .into_iter()
        .filter(|v| {
            matches!(
                v,
                BatchViolation::InvalidTriplet { .. } | BatchViolation::Conflict { .. }
            )
        })
        .collect();
    if let Some(v) = problems.first() {
        return Err(Error::invariant(
            "batches",
            serde_json::to_string(v).expect("violation serializes"),
        ));
    }

    let mut pairs = BTreeSet::new();
    let mut singles = BTreeSet::new();
    for t in batches.iter().flat_map(|b| &b.triplets) {
        pairs.insert((t.drive, t.target));
        singles.insert(t.spectator);
    }
    let isolated = |qubits: Vec<usize>| run_rb(backend, &qubits, config);
    let pair_curves: Vec<((usize, usize), RBCurve)> = pairs
        .into_iter()
        .map(|(d, t)| Ok(((d, t), isolated(vec![d, t])?)))
        .collect::<Result<_>>()?;
    let single_curves: Vec<(usize, RBCurve)> = singles
        .into_iter()
        .map(|s| Ok((s, isolated(vec![s])?)))
        .collect::<Result<_>>()?;

    let mut triplets = Vec::new();
    let mut warnings = Vec::new();
    let mut table = CrosstalkTable::default();
    for (bi, batch) in batches.iter().enumerate() {
        if batch.triplets.is_empty() {
            continue;
        }
        let circuits = build_batch_rb(batch, width, config)?;
        let counts = run_all(
            backend,
            &circuits,
            config.shots,
            config.seed,
            &[1, bi as u64],
        )?;
        for (i, t) in batch.triplets.iter().enumerate() {
            let pair_sim = RBCurve::new(
                vec![t.drive, t.target],
                points(config, &circuits, &counts, &[3 * i, 3 * i + 1]),
            );
            let spec_sim = RBCurve::new(
                vec![t.spectator],
                points(config, &circuits, &counts, &[3 * i + 2]),
            );
            let pair_iso = pair_curves
                .iter()
                .find(|(k, _)| *k == (t.drive, t.target))
                .expect("pair ran")
                .1
                .clone();
            let spec_iso = single_curves
                .iter()
                .find(|(k, _)| *k == t.spectator)
                .expect("qubit ran")
                .1
                .clone();
            match (pair_sim.rate(), spec_sim.rate()) {
                (Some(cx), Some(sq)) => {
                    let rates = CrosstalkRates {
                        cx_sim_error: cx,
                        sq_sim_error: sq,
                        cx_iso_error: pair_iso.rate(),
                        sq_iso_error: spec_iso.rate(),
                    };
                    table.insert(*t, rates)?;
                }
                _ => warnings.push(format!(
                    "{t}: simultaneous fit failed ({})",
                    pair_sim
                        .error
                        .clone()
                        .or(spec_sim.error.clone())
                        .unwrap_or_default()
                )),
            }
            for curve in [&pair_iso, &spec_iso] {
                if let Some(e) = &curve.error {
                    warnings.push(format!(
                        "{t}: isolated fit on {:?} failed ({e})",
                        curve.qubits
                    ));
                }
            }
            triplets.push(TripletResult {
                triplet: *t,
                batch: bi,
                pair_simultaneous: pair_sim,
                spectator_simultaneous: spec_sim,
                pair_isolated: pair_iso,
                spectator_isolated: spec_iso,
            });
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Characterization {
        config: config.clone(),
        survival_source: SURVIVAL_SOURCE,
        triplets,
        warnings,
        table,
    })
}
