//! Benchmark circuits, layout sweeps and fidelity comparisons.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::VirtualBackend;
use crate::circuit::{map_to_native, randomized_compile, Circuit, Gate};
use crate::device::{extract_triplets, DeviceSnapshot};
use crate::rng;
use crate::simulator::{exact_distribution, Counts};
use crate::{Error, Result};

/// Hadamard ladder on `n` qubits: `H(q_i), CX(q_i, q_{i+1})` for
/// `i = 0..n−2`, then `H(q_{n−1})`, then every qubit measured in order.
pub fn hadamard_ladder(n: usize) -> Circuit {
    assert!(n >= 1, "ladder needs at least one qubit");
    let mut c = Circuit::new(n);
    for i in 0..n - 1 {
        c.add(Gate::H, &[i]).add(Gate::CX, &[i, i + 1]);
    }
    c.add(Gate::H, &[n - 1]).measure_all();
    c
}

/// `(Σ_i √(p_i q_i))²` for two normalized distributions.
pub fn hellinger_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Arity {
            expected: p.len(),
            actual: q.len(),
        });
    }
    for d in [p, q] {
        let s: f64 = d.iter().sum();
        if (s - 1.0).abs() > 1e-9 || d.iter().any(|&x| x < 0.0) {
            return Err(Error::Domain(format!(
                "distribution is not normalized (sum {s})"
            )));
        }
    }
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((bc * bc).min(1.0))
}

/// Hellinger fidelity of observed counts against a distribution.
pub fn hellinger_fidelity_counts(counts: &Counts, q: &[f64]) -> Result<f64> {
    if counts.shots == 0 {
        return Err(Error::Domain("counts are empty".into()));
    }
    let mut p = vec![0.0; q.len()];
    for (k, &c) in &counts.counts {
        let i = usize::from_str_radix(k, 2)
            .ok()
            .filter(|&i| i < q.len())
            .ok_or_else(|| Error::Arity {
                expected: q.len().trailing_zeros() as usize,
                actual: k.len(),
            })?;
        p[i] += c as f64 / counts.shots as f64;
    }
    hellinger_fidelity(&p, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    MeasuredRun1,
    MeasuredRun2,
    ModelStandard,
    ModelCrosstalk,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::MeasuredRun1 => "measured-run-1",
            Source::MeasuredRun2 => "measured-run-2",
            Source::ModelStandard => "model-standard",
            Source::ModelCrosstalk => "model-crosstalk",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub layout: Vec<usize>,
    pub source: Source,
    pub fidelity: f64,
}

/// How each layout is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Execution {
    /// Exact output distribution, readout applied analytically.
    Exact,
    Sampled {
        shots: u64,
    },
    /// Randomized compiling: `randomizations` twirled copies with
    /// `shots_each` shots, counts summed before normalizing.
    Twirled {
        randomizations: usize,
        shots_each: u64,
    },
}

fn layout_key(layout: &[usize]) -> Vec<u64> {
    layout.iter().map(|&q| q as u64).collect()
}

/// Places `template` on `layout` (logical `i` → `layout[i]`) after checking
/// that the layout is a chain and the template only couples neighbors.
pub fn place(template: &Circuit, layout: &[usize], snapshot: &DeviceSnapshot) -> Result<Circuit> {
    let k = template.num_qubits();
    if layout.len() != k {
        return Err(Error::LayoutMismatch(format!(
            "layout has {} qubits, template {k}",
            layout.len()
        )));
    }
    for w in layout.windows(2) {
        if !snapshot.are_adjacent(w[0], w[1]) {
            return Err(Error::LayoutMismatch(format!(
                "{} and {} are not coupled",
                w[0], w[1]
            )));
        }
    }
    for inst in template.instructions() {
        if inst.gate == Gate::CX && inst.qubits[0].abs_diff(inst.qubits[1]) != 1 {
            return Err(Error::LayoutMismatch(format!(
                "template CX{:?} is not between chain neighbors",
                inst.qubits
            )));
        }
    }
    template.remap(layout, snapshot.width())
}

/// Hellinger fidelity of `template` on every layout against its noiseless
/// distribution. Layouts run in parallel; each draws randomness from
/// `(seed, layout)` only.
pub fn sweep(
    template: &Circuit,
    layouts: &[Vec<usize>],
    backend: &VirtualBackend,
    source: Source,
    execution: Execution,
    seed: u64,
) -> Result<Vec<FidelityRecord>> {
    let ideal = exact_distribution(template)?;
    let snapshot = &backend.snapshot;
    let triplets = extract_triplets(snapshot);
    layouts
        .par_iter()
        .map(|layout| {
            let physical = map_to_native(&place(template, layout, snapshot)?, snapshot)?;
            let key = layout_key(layout);
            let fidelity = match execution {
                Execution::Exact => hellinger_fidelity(&backend.exact(&physical)?, &ideal)?,
                Execution::Sampled { shots } => {
                    let counts = backend.run(
                        &physical,
                        shots,
                        rng::derive_seed(seed, "sweep.shots", &key),
                    )?;
                    hellinger_fidelity_counts(&counts, &ideal)?
                }
                Execution::Twirled {
                    randomizations,
                    shots_each,
                } => {
                    let mut total: Option<Counts> = None;
                    for r in 0..randomizations {
                        let mut idx = key.clone();
                        idx.push(r as u64);
                        let twirl_seed = rng::derive_seed(seed, "sweep.twirl", &idx);
                        let (twirled, _) =
                            randomized_compile(&physical, snapshot, &triplets, twirl_seed)?;
                        let counts = backend.run(
                            &twirled,
                            shots_each,
                            rng::derive_seed(seed, "sweep.shots", &idx),
                        )?;
                        match &mut total {
                            Some(t) => t.merge(&counts),
                            None => total = Some(counts),
                        }
                    }
                    let total = total.ok_or_else(|| {
                        Error::Domain("twirling needs at least one randomization".into())
                    })?;
                    hellinger_fidelity_counts(&total, &ideal)?
                }
            };
            Ok(FidelityRecord {
                layout: layout.clone(),
                source,
                fidelity,
            })
        })
        .collect()
}

fn by_layout(records: &[FidelityRecord]) -> BTreeMap<&[usize], f64> {
    records
        .iter()
        .map(|r| (r.layout.as_slice(), r.fidelity))
        .collect()
}

fn paired<'a>(
    a: &'a [FidelityRecord],
    b: &'a [FidelityRecord],
) -> Result<Vec<(&'a [usize], f64, f64)>> {
    let (ma, mb) = (by_layout(a), by_layout(b));
    if ma.len() != a.len() || mb.len() != b.len() || ma.keys().ne(mb.keys()) {
        return Err(Error::LayoutMismatch(
            "record sets cover different layouts".into(),
        ));
    }
    Ok(a.iter()
        .map(|r| (r.layout.as_slice(), r.fidelity, mb[r.layout.as_slice()]))
        .collect())
}

/// Layouts whose fidelities differ by strictly more than `threshold`
/// between two runs, in the order of `run1`.
pub fn filter_outliers(
    run1: &[FidelityRecord],
    run2: &[FidelityRecord],
    threshold: f64,
) -> Result<Vec<Vec<usize>>> {
    Ok(paired(run1, run2)?
        .into_iter()
        .filter(|(_, a, b)| (a - b).abs() > threshold)
        .map(|(l, _, _)| l.to_vec())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub rms: f64,
    /// RMS over the layouts that are not flagged.
    pub rms_reduced: f64,
    pub flagged_layouts: Vec<Vec<usize>>,
    pub layouts: usize,
}

fn rms(diffs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = diffs.fold((0.0, 0usize), |(s, n), d| (s + d * d, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Root-mean-square fidelity deviation, over all layouts and over the
/// layouts not in `flagged`.
pub fn compare(
    measured: &[FidelityRecord],
    simulated: &[FidelityRecord],
    flagged: &[Vec<usize>],
) -> Result<ComparisonResult> {
    let pairs = paired(measured, simulated)?;
    let flagged_set: std::collections::BTreeSet<&[usize]> =
        flagged.iter().map(Vec::as_slice).collect();
    if let Some(f) = flagged_set
        .iter()
        .find(|f| !pairs.iter().any(|(l, _, _)| l == *f))
    {
        return Err(Error::LayoutMismatch(format!(
            "flagged layout {f:?} is not in the record set"
        )));
    }
    Ok(ComparisonResult {
        rms: rms(pairs.iter().map(|(_, a, b)| a - b)),
        rms_reduced: rms(pairs
            .iter()
            .filter(|(l, _, _)| !flagged_set.contains(l))
            .map(|(_, a, b)| a - b)),
        flagged_layouts: flagged.to_vec(),
        layouts: pairs.len(),
    })
}

/// Scatter data: measured fidelity on x, simulated on y, with the flag.
pub fn plot_data(
    measured: &[FidelityRecord],
    simulated: &[FidelityRecord],
    flagged: &[Vec<usize>],
) -> Result<serde_json::Value> {
    let points: Vec<serde_json::Value> = paired(measured, simulated)?
        .into_iter()
        .map(|(l, x, y)| {
            serde_json::json!({ "layout": layout_label(l), "x": x, "y": y, "flagged": flagged.iter().any(|f| f == l) })
        })
        .collect();
    let source = |r: &[FidelityRecord]| r.first().map(|r| r.source.to_string());
    Ok(
        serde_json::json!({ "x_source": source(measured), "y_source": source(simulated), "points": points }),
    )
}

/// Dash-joined qubit ids.
pub fn layout_label(layout: &[usize]) -> String {
    layout
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("-")
}
