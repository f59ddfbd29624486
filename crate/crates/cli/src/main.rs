use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crosstalk_sim::backend::{BackendNoise, VirtualBackend};
use crosstalk_sim::bench::{
    compare, filter_outliers, hadamard_ladder, layout_label, plot_data, sweep, ComparisonResult,
    Execution, FidelityRecord, Source,
};
use crosstalk_sim::device::{
    batches_from_json, batches_to_json, detect_collisions, enumerate_chains, extract_triplets,
    load_snapshot, schedule_batches, ChainOrientation, CollisionThresholds, DeviceSnapshot,
};
use crosstalk_sim::noise::{CrosstalkInjection, CrosstalkTable};
use crosstalk_sim::rb::{characterize, RBConfig};
use crosstalk_sim::{rng, Error};

mod manifest;

use manifest::{manifest_path, RunManifest};

/// Fidelity deviation between the two measured runs above which a layout
/// is flagged.
const OUTLIER_THRESHOLD: f64 = 0.02;

#[derive(Parser, Debug)]
#[command(
    name = "crosstalk-sim",
    version,
    about = "Crosstalk characterization and noise-model comparison",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    /// Replay the run recorded in a manifest file.
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract triplets and group them into simultaneous-RB batches.
    Plan(PlanArgs),
    /// Simultaneous and isolated RB on the virtual backend.
    Characterize(CharacterizeArgs),
    /// Ladder benchmark over every chain layout, measured against models.
    Sweep(SweepArgs),
    /// Frequency-collision search.
    Collisions(CollisionsArgs),
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[arg(long)]
    calibration: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Paper,
    Desk,
}

#[derive(Args, Debug)]
struct CharacterizeArgs {
    #[arg(long)]
    calibration: PathBuf,
    /// Ground-truth crosstalk for the virtual backend.
    #[arg(long)]
    inject: Option<PathBuf>,
    /// Batches to run (default: planned from the calibration).
    #[arg(long)]
    batches: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    config: Preset,
    /// Disable thermal relaxation while qubits idle.
    #[arg(long)]
    no_idle_relaxation: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Model {
    Standard,
    Crosstalk,
    Both,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    calibration: PathBuf,
    /// Crosstalk table, required for the crosstalk model.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Ground-truth crosstalk for the measured runs.
    #[arg(long)]
    inject: Option<PathBuf>,
    /// Ladder width.
    #[arg(long, default_value_t = 8)]
    ladder: usize,
    #[arg(long, value_enum, default_value = "both")]
    model: Model,
    /// Randomized compiling for the measured runs: randomizations x shots.
    #[arg(long, value_name = "RxS", value_parser = parse_twirl)]
    twirl: Option<(usize, u64)>,
    /// Shots per layout for untwirled measured runs.
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CollisionsArgs {
    #[arg(long)]
    calibration: PathBuf,
    #[arg(long)]
    thresholds: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_twirl(s: &str) -> Result<(usize, u64), String> {
    let (r, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected RxS, got {s:?}"))?;
    let r: usize = r.parse().map_err(|e| format!("randomizations: {e}"))?;
    let n: u64 = n.parse().map_err(|e| format!("shots: {e}"))?;
    if r == 0 || n == 0 {
        return Err("randomizations and shots must be positive".into());
    }
    Ok((r, n))
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Fit { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn snapshot(path: &Path) -> Outcome<DeviceSnapshot> {
    Ok(load_snapshot(read(path)?.as_bytes())?)
}

fn injection(path: Option<&Path>, snap: &DeviceSnapshot) -> Outcome<Option<CrosstalkInjection>> {
    path.map(|p| {
        let inj = CrosstalkInjection::from_json(&read(p)?)?;
        inj.validate(snap)?;
        Ok(inj)
    })
    .transpose()
}

/// What a finished command reports for its manifest.
struct Run {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seed: Option<u64>,
    config: Option<String>,
    /// Where the manifest goes, if the command wrote files.
    manifest: Option<PathBuf>,
}

fn plan(a: &PlanArgs) -> Outcome<Run> {
    let snap = snapshot(&a.calibration)?;
    let triplets = extract_triplets(&snap);
    let batches = schedule_batches(&triplets, &snap);
    write(&a.out, &batches_to_json(&batches))?;
    println!("{} triplets, {} batches", triplets.len(), batches.len());
    Ok(Run {
        inputs: vec![a.calibration.clone()],
        outputs: vec![a.out.clone()],
        seed: None,
        config: None,
        manifest: Some(manifest_path(&a.out, false)),
    })
}

fn characterize_cmd(a: &CharacterizeArgs) -> Outcome<Run> {
    let snap = snapshot(&a.calibration)?;
    let inj = injection(a.inject.as_deref(), &snap)?;
    let batches = match &a.batches {
        Some(p) => batches_from_json(&read(p)?)?,
        None => schedule_batches(&extract_triplets(&snap), &snap),
    };
    let (name, config) = match a.config {
        Preset::Paper => ("paper", RBConfig::paper(a.seed)),
        Preset::Desk => ("desk", RBConfig::desk(a.seed)),
    };
    let mut noise = BackendNoise {
        idle_relaxation: !a.no_idle_relaxation,
        ..BackendNoise::standard()
    };
    noise.injection = inj;
    let result = characterize(&VirtualBackend::new(snap, noise), &batches, &config)?;
    let diagnostics = diagnostics_path(&a.out);
    write(&a.out, &result.table.to_json())?;
    write(
        &diagnostics,
        &serde_json::to_string_pretty(&result).expect("diagnostics serialize"),
    )?;
    println!(
        "{} triplets characterized, {} warnings",
        result.table.len(),
        result.warnings.len()
    );
    let mut inputs = vec![a.calibration.clone()];
    inputs.extend(a.inject.iter().cloned());
    inputs.extend(a.batches.iter().cloned());
    Ok(Run {
        inputs,
        outputs: vec![a.out.clone(), diagnostics],
        seed: Some(a.seed),
        config: Some(name.into()),
        manifest: Some(manifest_path(&a.out, false)),
    })
}

fn diagnostics_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".diagnostics.json");
    PathBuf::from(name)
}

fn records_csv(records: &[&[FidelityRecord]], flagged: &[Vec<usize>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["layout", "source", "fidelity", "flagged"])
        .expect("in-memory write");
    for r in records.iter().flat_map(|rs| rs.iter()) {
        let flag = flagged.contains(&r.layout);
        w.write_record([
            layout_label(&r.layout),
            r.source.to_string(),
            format!("{:.12}", r.fidelity),
            flag.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

fn sweep_cmd(a: &SweepArgs) -> Outcome<Run> {
    let snap = snapshot(&a.calibration)?;
    if a.ladder == 0 || a.ladder > snap.num_qubits() {
        return Err(Failure::Input(format!(
            "ladder width {} exceeds the {}-qubit topology",
            a.ladder,
            snap.num_qubits()
        )));
    }
    let table = match (&a.table, a.model) {
        (Some(p), _) => {
            let t = CrosstalkTable::from_json(&read(p)?)?;
            t.validate(&snap)?;
            Some(t)
        }
        (None, Model::Standard) => None,
        (None, _) => {
            return Err(Failure::Input(
                "--table is required for the crosstalk model".into(),
            ))
        }
    };
    if a.shots == 0 {
        return Err(Failure::Input("--shots must be positive".into()));
    }
    let mut truth_noise = BackendNoise::standard();
    truth_noise.injection = injection(a.inject.as_deref(), &snap)?;
    let truth = VirtualBackend::new(snap.clone(), truth_noise);
    let template = hadamard_ladder(a.ladder);
    let layouts = enumerate_chains(&snap, a.ladder, ChainOrientation::Directed)?;
    let execution = match a.twirl {
        Some((randomizations, shots_each)) => Execution::Twirled {
            randomizations,
            shots_each,
        },
        None => Execution::Sampled { shots: a.shots },
    };
    let run_seed = |k| rng::derive_seed(a.seed, "cli.sweep.run", &[k]);
    let run1 = sweep(
        &template,
        &layouts,
        &truth,
        Source::MeasuredRun1,
        execution,
        run_seed(1),
    )?;
    let run2 = sweep(
        &template,
        &layouts,
        &truth,
        Source::MeasuredRun2,
        execution,
        run_seed(2),
    )?;
    let flagged = filter_outliers(&run1, &run2, OUTLIER_THRESHOLD)?;

    let mut models: Vec<(Source, Vec<FidelityRecord>)> = Vec::new();
    if a.model != Model::Crosstalk {
        let b = VirtualBackend::new(snap.clone(), BackendNoise::standard());
        models.push((
            Source::ModelStandard,
            sweep(
                &template,
                &layouts,
                &b,
                Source::ModelStandard,
                Execution::Exact,
                0,
            )?,
        ));
    }
    if let Some(t) = table.filter(|_| a.model != Model::Standard) {
        let b = VirtualBackend::new(snap.clone(), BackendNoise::crosstalk_aware(t));
        models.push((
            Source::ModelCrosstalk,
            sweep(
                &template,
                &layouts,
                &b,
                Source::ModelCrosstalk,
                Execution::Exact,
                0,
            )?,
        ));
    }

    let mut comparison = serde_json::Map::new();
    let mut plots = serde_json::Map::new();
    comparison.insert("layouts".into(), json!(layouts.len()));
    comparison.insert(
        "flagged_layouts".into(),
        json!(flagged.iter().map(|l| layout_label(l)).collect::<Vec<_>>()),
    );
    let run_pair = compare(&run1, &run2, &flagged)?;
    comparison.insert("run-1 vs run-2".into(), comparison_json(&run_pair));
    plots.insert("run-1 vs run-2".into(), plot_data(&run1, &run2, &flagged)?);
    for (source, recs) in &models {
        comparison.insert(
            source.to_string(),
            comparison_json(&compare(&run1, recs, &flagged)?),
        );
        plots.insert(source.to_string(), plot_data(&run1, recs, &flagged)?);
    }

    let mut all: Vec<&[FidelityRecord]> = vec![&run1, &run2];
    all.extend(models.iter().map(|(_, r)| r.as_slice()));
    let outputs = ["records.csv", "comparison.json", "plot.json"].map(|f| a.out.join(f));
    write(&outputs[0], &records_csv(&all, &flagged))?;
    write(
        &outputs[1],
        &serde_json::to_string_pretty(&comparison).expect("comparison serializes"),
    )?;
    write(
        &outputs[2],
        &serde_json::to_string_pretty(&plots).expect("plot data serializes"),
    )?;

    for (source, recs) in &models {
        let c = compare(&run1, recs, &flagged)?;
        println!("{source}: rms {:.6} (reduced {:.6})", c.rms, c.rms_reduced);
    }
    println!("{} layouts, {} flagged", layouts.len(), flagged.len());
    let mut inputs = vec![a.calibration.clone()];
    inputs.extend(a.table.iter().cloned());
    inputs.extend(a.inject.iter().cloned());
    Ok(Run {
        inputs,
        outputs: outputs.to_vec(),
        seed: Some(a.seed),
        config: None,
        manifest: Some(manifest_path(&a.out, true)),
    })
}

fn comparison_json(c: &ComparisonResult) -> serde_json::Value {
    json!({ "rms": c.rms, "rms_reduced": c.rms_reduced, "layouts": c.layouts })
}

fn collisions(a: &CollisionsArgs) -> Outcome<Run> {
    let snap = snapshot(&a.calibration)?;
    let thresholds = match &a.thresholds {
        Some(p) => CollisionThresholds::from_json(&read(p)?)?,
        None => CollisionThresholds::default(),
    };
    let report = detect_collisions(&snap, &thresholds)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &a.out {
        Some(p) => write(p, &text)?,
        None => println!("{text}"),
    }
    let mut inputs = vec![a.calibration.clone()];
    inputs.extend(a.thresholds.iter().cloned());
    Ok(Run {
        inputs,
        outputs: a.out.iter().cloned().collect(),
        seed: None,
        config: None,
        manifest: a.out.as_deref().map(|p| manifest_path(p, false)),
    })
}

fn execute(command: &Command, args: Vec<String>) -> Outcome<()> {
    let started = chrono::Utc::now().to_rfc3339();
    let (name, run) = match command {
        Command::Plan(a) => ("plan", plan(a)?),
        Command::Characterize(a) => ("characterize", characterize_cmd(a)?),
        Command::Sweep(a) => ("sweep", sweep_cmd(a)?),
        Command::Collisions(a) => ("collisions", collisions(a)?),
    };
    if let Some(path) = &run.manifest {
        let manifest = RunManifest {
            command: name.into(),
            args,
            inputs: run.inputs,
            seed: run.seed,
            config: run.config,
            outputs: run.outputs,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            started,
            finished: chrono::Utc::now().to_rfc3339(),
        };
        write(path, &manifest.to_json())?;
    }
    Ok(())
}

fn configure_threads() -> Outcome<()> {
    let Ok(value) = std::env::var("CROSSTALK_SIM_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Input(format!(
            "CROSSTALK_SIM_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numerical(format!("thread pool: {e}")))
}

fn run() -> Outcome<()> {
    configure_threads()?;
    let cli = Cli::parse();
    let (command, args) = match (cli.manifest, cli.command) {
        (Some(path), _) => {
            let m = RunManifest::read(&path).map_err(Failure::Input)?;
            let argv = std::iter::once("crosstalk-sim".to_string()).chain(m.args.iter().cloned());
            let replay = Cli::try_parse_from(argv)
                .map_err(|e| Failure::Input(format!("manifest arguments: {e}")))?;
            (
                replay
                    .command
                    .ok_or_else(|| Failure::Input("manifest has no command".into()))?,
                m.args,
            )
        }
        (None, Some(command)) => (command, std::env::args().skip(1).collect()),
        (None, None) => {
            return Err(Failure::Input(
                "a subcommand or --manifest is required".into(),
            ))
        }
    };
    execute(&command, args)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
