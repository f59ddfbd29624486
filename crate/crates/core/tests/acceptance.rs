//! Acceptance checks for the full pipeline. Prints one line per criterion
//! and exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crosstalk_sim::backend::{BackendNoise, VirtualBackend};
use crosstalk_sim::bench::{
    compare, filter_outliers, hadamard_ladder, hellinger_fidelity, hellinger_fidelity_counts,
    place, sweep, Execution, FidelityRecord, Source,
};
use crosstalk_sim::circuit::{map_to_native, randomized_compile, Circuit, Gate};
use crosstalk_sim::device::{
    enumerate_chains, extract_triplets, schedule_batches, validate_batches, ChainOrientation,
    DeviceSnapshot, Triplet,
};
use crosstalk_sim::fixtures::{published_batches, ehningen, ehningen_injection};
use crosstalk_sim::noise::{depolarizing, thermal_relaxation, ChannelOrigin, CrosstalkInjection};
use crosstalk_sim::rb::{characterize, run_rb, RBConfig};
use crosstalk_sim::simulator::CMatrix;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn triplet_count() -> Outcome {
    let snap = ehningen();
    let found: BTreeSet<Triplet> = extract_triplets(&snap).into_iter().collect();
    let published: BTreeSet<Triplet> = published_batches()
        .into_iter()
        .flat_map(|b| b.triplets)
        .collect();
    let n = extract_triplets(&snap).len();
    outcome(
        n == 41 && found == published,
        format!(
            "count {n} (expected 41), equal to published set: {}",
            found == published
        ),
    )
}

fn batch_validity() -> Outcome {
    let snap = ehningen();
    let published = validate_batches(&published_batches(), &snap);
    let triplets = extract_triplets(&snap);
    let scheduled = schedule_batches(&triplets, &snap);
    let own = validate_batches(&scheduled, &snap);
    let covered: usize = scheduled.iter().map(|b| b.triplets.len()).sum();
    outcome(
        published.is_empty() && own.is_empty() && scheduled.len() <= 13 && covered == triplets.len(),
        format!(
            "published batches: {} violations; scheduled {} batches, {} violations, {covered}/{} triplets",
            published.len(),
            scheduled.len(),
            own.len(),
            triplets.len()
        ),
    )
}

fn brute_force_chains(snap: &DeviceSnapshot, len: usize) -> BTreeSet<Vec<usize>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in &snap.edges {
        adj.entry(e.drive).or_default().push(e.target);
        adj.entry(e.target).or_default().push(e.drive);
    }
    fn dfs(
        adj: &BTreeMap<usize, Vec<usize>>,
        len: usize,
        path: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if path.len() == len {
            out.insert(path.clone());
            return;
        }
        let last = *path.last().unwrap();
        for &n in adj.get(&last).into_iter().flatten() {
            if !path.contains(&n) {
                path.push(n);
                dfs(adj, len, path, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    for q in snap.qubits.iter().map(|q| q.id) {
        dfs(&adj, len, &mut vec![q], &mut out);
    }
    out
}

fn layout_count() -> Outcome {
    let snap = ehningen();
    let chains = enumerate_chains(&snap, 8, ChainOrientation::Directed).unwrap();
    let oracle = brute_force_chains(&snap, 8);
    let same =
        chains.iter().cloned().collect::<BTreeSet<_>>() == oracle && chains.len() == oracle.len();
    outcome(
        chains.len() == 132 && same,
        format!(
            "{} layouts, oracle {} , identical: {same}",
            chains.len(),
            oracle.len()
        ),
    )
}

fn random_state(rng: &mut ChaCha8Rng) -> CMatrix {
    let mut m = CMatrix::zeros(2);
    for _ in 0..3 {
        let a = C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let b = C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let v = [a / norm, b / norm];
        let w = rng.gen::<f64>();
        for r in 0..2 {
            for c in 0..2 {
                m[(r, c)] += v[r] * v[c].conj() * w;
            }
        }
    }
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] /= tr;
        }
    }
    m
}

fn kraus_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_decay: f64 = 0.0;
    let mut worst_cptp: f64 = 0.0;
    for &(t1, t2, dur) in &[
        (100.0, 80.0, 35.0),
        (50.0, 100.0, 300.0),
        (80.0, 20.0, 1000.0),
        (120.0, 150.0, 5000.0),
    ] {
        let ch = thermal_relaxation(t1, t2, dur).unwrap();
        worst_cptp = worst_cptp.max(ch.cptp_error());
        let rho = random_state(&mut rng);
        let out = ch.apply_to(&rho);
        let t_us = dur / 1000.0;
        worst_decay = worst_decay.max((out[(1, 1)].re - rho[(1, 1)].re * (-t_us / t1).exp()).abs());
        worst_decay = worst_decay.max((out[(0, 1)] - rho[(0, 1)] * (-t_us / t2).exp()).norm());
    }
    let mut worst_depol: f64 = 0.0;
    let depol = depolarizing(1, 0.25).unwrap();
    worst_cptp = worst_cptp.max(depol.cptp_error());
    for arity in 1..=3 {
        worst_cptp = worst_cptp.max(depolarizing(arity, 0.01).unwrap().cptp_error());
    }
    for _ in 0..100 {
        let out = depol.apply_to(&random_state(&mut rng));
        let target = CMatrix::identity(2);
        for r in 0..2 {
            for c in 0..2 {
                worst_depol = worst_depol.max((out[(r, c)] - target[(r, c)] * 0.5).norm());
            }
        }
    }
    outcome(
        worst_decay <= 1e-12 && worst_cptp <= 1e-12 && worst_depol <= 1e-12,
        format!(
            "decay {worst_decay:.1e}, CPTP {worst_cptp:.1e}, depolarized-to-I/2 {worst_depol:.1e}"
        ),
    )
}

fn round_trip(config: &RBConfig, tolerance: f64) -> (bool, String) {
    let snap = ehningen();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [0.002, 0.01, 0.05] {
        for (qubits, noise) in [
            (vec![0], BackendNoise::clifford_depolarizing(r, 0.0)),
            (vec![0, 1], BackendNoise::clifford_depolarizing(0.0, r)),
        ] {
            let curve = run_rb(&VirtualBackend::new(snap.clone(), noise), &qubits, config).unwrap();
            let rel = curve.rate().map_or(f64::INFINITY, |fit| (fit - r) / r);
            pass &= rel.abs() <= tolerance;
            parts.push(format!(
                "r={r} d={}: {:+.1}%",
                1 << qubits.len(),
                100.0 * rel
            ));
        }
    }
    (pass, parts.join(", "))
}

fn rb_round_trip() -> Outcome {
    let (paper_ok, paper) = round_trip(&RBConfig::paper(0), 0.05);
    let t = Instant::now();
    let (desk_ok, desk) = round_trip(&RBConfig::desk(0), 0.10);
    let fast = t.elapsed().as_secs_f64() < 30.0;
    outcome(
        paper_ok && desk_ok && fast,
        format!("paper (5%): {paper}; desk (10%): {desk}"),
    )
}

fn hot_triplet() -> Triplet {
    Triplet::new(25, 22, 24)
}

fn crosstalk_detection() -> Outcome {
    let snap = ehningen();
    let batches = published_batches();
    let config = RBConfig::paper(0);
    let noise = BackendNoise {
        idle_relaxation: false,
        ..BackendNoise::standard()
    };
    let base = characterize(
        &VirtualBackend::new(snap.clone(), noise.clone()),
        &batches,
        &config,
    )
    .unwrap();
    let r_iso = base
        .table
        .get(&hot_triplet())
        .unwrap()
        .cx_iso_error
        .unwrap();
    // A depolarizing weight w after each CX adds 0.75·w per CX; a two-qubit
    // Clifford averages 1.5 CX.
    let mut injection = CrosstalkInjection::default();
    injection.weights.insert(hot_triplet(), 4.0 * r_iso / 1.125);
    let result = characterize(
        &VirtualBackend::new(snap, noise.with_injection(injection)),
        &batches,
        &config,
    )
    .unwrap();
    let mut ratio = 0.0;
    let mut outside = Vec::new();
    for t in &result.triplets {
        let (sim, iso) = (
            t.pair_simultaneous.fit.unwrap(),
            t.pair_isolated.fit.unwrap(),
        );
        if t.triplet == hot_triplet() {
            ratio = sim.r / iso.r;
        } else if (sim.r - iso.r).abs() > 2.0 * (sim.r_stderr.powi(2) + iso.r_stderr.powi(2)).sqrt()
        {
            outside.push(t.triplet.to_string());
        }
    }
    outcome(
        ratio >= 3.0 && outside.is_empty(),
        format!(
            "injected {} at {:.2}x isolated; {} of {} others outside 2 sigma",
            hot_triplet(),
            ratio,
            outside.len(),
            result.triplets.len() - 1
        ),
    )
}

fn spectator_idle_excess() -> Outcome {
    let result = characterize(
        &VirtualBackend::new(ehningen(), BackendNoise::standard()),
        &published_batches(),
        &RBConfig::paper(0),
    )
    .unwrap();
    let above = result
        .triplets
        .iter()
        .filter(|t| t.spectator_simultaneous.fit.unwrap().r > t.spectator_isolated.fit.unwrap().r)
        .count();
    outcome(
        above == result.triplets.len(),
        format!(
            "sq_sim > sq_iso on {above}/{} triplets",
            result.triplets.len()
        ),
    )
}

/// One-sided sign test: P(X ≥ k) for X ~ Binomial(n, 1/2).
fn sign_test(k: usize, n: usize) -> f64 {
    let mut p = 0.0;
    let mut c = 1.0f64;
    for i in 0..=n {
        if i > 0 {
            c = c * (n - i + 1) as f64 / i as f64;
        }
        if i >= k {
            p += c;
        }
    }
    p / 2f64.powi(n as i32)
}

fn model_comparison() -> Outcome {
    let snap = ehningen();
    let truth = VirtualBackend::new(
        snap.clone(),
        BackendNoise::standard().with_injection(ehningen_injection()),
    );
    let table = characterize(&truth, &published_batches(), &RBConfig::desk(0))
        .unwrap()
        .table;
    let layouts = enumerate_chains(&snap, 8, ChainOrientation::Directed).unwrap();
    let ladder = hadamard_ladder(8);
    let shots = Execution::Sampled { shots: 10_000 };
    let run1 = sweep(&ladder, &layouts, &truth, Source::MeasuredRun1, shots, 1).unwrap();
    let run2 = sweep(&ladder, &layouts, &truth, Source::MeasuredRun2, shots, 2).unwrap();
    let standard = VirtualBackend::new(snap.clone(), BackendNoise::standard());
    let aware = VirtualBackend::new(snap.clone(), BackendNoise::crosstalk_aware(table));
    let std_recs = sweep(
        &ladder,
        &layouts,
        &standard,
        Source::ModelStandard,
        Execution::Exact,
        0,
    )
    .unwrap();
    let xt_recs = sweep(
        &ladder,
        &layouts,
        &aware,
        Source::ModelCrosstalk,
        Execution::Exact,
        0,
    )
    .unwrap();
    let flagged = filter_outliers(&run1, &run2, 0.02).unwrap();
    let rms_std = compare(&run1, &std_recs, &flagged).unwrap();
    let rms_xt = compare(&run1, &xt_recs, &flagged).unwrap();

    let affected: Vec<usize> = (0..layouts.len())
        .filter(|&i| {
            let native =
                map_to_native(&place(&ladder, &layouts[i], &snap).unwrap(), &snap).unwrap();
            let bound = truth.bind(&native).unwrap();
            bound
                .instructions
                .iter()
                .any(|n| n.after.iter().any(|c| c.origin == ChannelOrigin::Injection))
        })
        .collect();
    let k = affected
        .iter()
        .filter(|&&i| std_recs[i].fidelity >= run1[i].fidelity)
        .count();
    let p = sign_test(k, affected.len());
    outcome(
        rms_xt.rms < rms_std.rms && p < 0.05,
        format!(
            "rms crosstalk {:.6} vs standard {:.6}; standard >= measured on {k}/{} affected layouts (p = {p:.1e})",
            rms_xt.rms,
            rms_std.rms,
            affected.len()
        ),
    )
}

fn twirl_test_circuit() -> Circuit {
    let mut c = Circuit::new(27);
    c.add(Gate::H, &[0])
        .add(Gate::RZ(0.4), &[0])
        .add(Gate::CX, &[0, 1])
        .add(Gate::SX, &[2])
        .add(Gate::CX, &[1, 2])
        .add(Gate::RZ(1.1), &[2])
        .add(Gate::H, &[3])
        .add(Gate::CX, &[2, 3])
        .add(Gate::SX, &[1])
        .add(Gate::CX, &[1, 4]);
    for q in [0, 1, 2, 3, 4] {
        c.add(Gate::Measure, &[q]);
    }
    c
}

fn pauli_noise_snapshot() -> DeviceSnapshot {
    let snap = ehningen();
    let mut qubits = snap.qubits.clone();
    for q in &mut qubits {
        q.t1 = 1e12;
        q.t2 = 1e12;
    }
    DeviceSnapshot::new("pauli", "", qubits, snap.edges.clone()).unwrap()
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (
        m,
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt(),
    )
}

fn twirling_identity() -> Outcome {
    let snap = pauli_noise_snapshot();
    let triplets = extract_triplets(&snap);
    let native = map_to_native(&twirl_test_circuit(), &snap).unwrap();
    let noiseless = VirtualBackend::new(snap.clone(), BackendNoise::ideal());
    let ideal = noiseless.exact(&native).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let (twirled, _) = randomized_compile(&native, &snap, &triplets, seed).unwrap();
        let p = noiseless.exact(&twirled).unwrap();
        worst = worst.max(
            p.iter()
                .zip(&ideal)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }

    let backend = VirtualBackend::new(snap.clone(), BackendNoise::standard());
    let untwirled = |seed: u64| {
        hellinger_fidelity_counts(&backend.run(&native, 10_000, seed).unwrap(), &ideal).unwrap()
    };
    let twirled = |seed: u64| {
        let mut total = None;
        for r in 0..100u64 {
            let (c, _) = randomized_compile(&native, &snap, &triplets, seed * 1000 + r).unwrap();
            let counts = backend.run(&c, 100, seed * 1000 + r).unwrap();
            match &mut total {
                None => total = Some(counts),
                Some(t) => t.merge(&counts),
            }
        }
        hellinger_fidelity_counts(&total.unwrap(), &ideal).unwrap()
    };
    let reps_u: Vec<f64> = (1..=30).map(untwirled).collect();
    let reps_t: Vec<f64> = (1..=30).map(twirled).collect();
    let (f_u, f_t) = (untwirled(0), twirled(0));
    let sigma = (mean_sd(&reps_u).1.powi(2) + mean_sd(&reps_t).1.powi(2)).sqrt();
    let z = (f_t - f_u) / sigma;
    outcome(
        worst <= 1e-12 && z.abs() <= 3.0,
        format!("50 seeds max deviation {worst:.1e}; twirled {f_t:.4} vs untwirled {f_u:.4} ({z:+.2} sigma)"),
    )
}

fn outlier_filter() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let layouts = enumerate_chains(&ehningen(), 8, ChainOrientation::Directed).unwrap();
    let mut run1 = Vec::new();
    let mut run2 = Vec::new();
    let mut planted = Vec::new();
    for layout in &layouts {
        let f = rng.gen_range(0.3..0.7);
        let shift = if rng.gen_bool(0.1) {
            planted.push(layout.clone());
            rng.gen_range(0.021..0.2)
        } else {
            rng.gen_range(0.0..0.019)
        };
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        run1.push(FidelityRecord {
            layout: layout.clone(),
            source: Source::MeasuredRun1,
            fidelity: f,
        });
        run2.push(FidelityRecord {
            layout: layout.clone(),
            source: Source::MeasuredRun2,
            fidelity: f + sign * shift,
        });
    }
    let flagged = filter_outliers(&run1, &run2, 0.02).unwrap();
    let model: Vec<FidelityRecord> = run1
        .iter()
        .map(|r| FidelityRecord {
            fidelity: rng.gen_range(0.3..0.7),
            source: Source::ModelStandard,
            ..r.clone()
        })
        .collect();
    let result = compare(&run1, &model, &flagged).unwrap();
    let kept: Vec<f64> = run1
        .iter()
        .zip(&model)
        .filter(|(r, _)| !planted.contains(&r.layout))
        .map(|(a, b)| (a.fidelity - b.fidelity).powi(2))
        .collect();
    let expected = (kept.iter().sum::<f64>() / kept.len() as f64).sqrt();
    let exact = flagged == planted && (result.rms_reduced - expected).abs() < 1e-15;
    outcome(
        exact,
        format!(
            "{} planted, {} flagged, reduced rms matches: {exact}",
            planted.len(),
            flagged.len()
        ),
    )
}

fn hellinger_units() -> Outcome {
    let same = hellinger_fidelity(&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5]).unwrap();
    let disjoint = hellinger_fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
    let half = hellinger_fidelity(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
    let examples =
        (same - 1.0).abs() <= 1e-15 && disjoint.abs() <= 1e-15 && (half - 0.5).abs() <= 1e-15;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut symmetric = true;
    for _ in 0..1000 {
        let n = rng.gen_range(1..64);
        let mut draw = || {
            let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let (p, q) = (draw(), draw());
        symmetric &= hellinger_fidelity(&p, &q).unwrap() == hellinger_fidelity(&q, &p).unwrap();
    }
    outcome(
        examples && symmetric,
        format!("examples exact: {examples}; symmetric on 1000 pairs: {symmetric}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("triplet count", triplet_count),
        ("batch validity", batch_validity),
        ("layout count", layout_count),
        ("kraus correctness", kraus_correctness),
        ("rb round trip", rb_round_trip),
        ("crosstalk detection", crosstalk_detection),
        ("spectator idle excess", spectator_idle_excess),
        ("model comparison", model_comparison),
        ("twirling identity", twirling_identity),
        ("outlier filter", outlier_filter),
        ("hellinger", hellinger_units),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {:<22} {} ({:.1} s) {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
