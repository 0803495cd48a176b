mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use grover_core::grover::{Algorithm, GroverConfig};
use grover_core::lab::report::{self, read_threshold_csv};
use grover_core::lab::{
    extrapolate, find_threshold_with, fit_scaling, log_grid, relaxation_scan, relaxation_scan_pruned, selectivity,
    BackendChoice, Experiment, FitModel, FitResult, ThresholdResult, DEFAULT_SHOTS,
};
use grover_core::noise::{ErrorKind, GateClass, NoiseModel, NoiseRule};

use crate::config::{parse_grid, FileConfig};

#[derive(Parser, Debug)]
#[command(name = "grover-lab", version, about = "Noisy Grover search experiments")]
struct Cli {
    /// TOML file with defaults (flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one circuit under one noise model and write its distribution.
    Run(RunArgs),
    /// Sweep an error strength and locate the S = 3 crossing.
    Threshold(ThresholdArgs),
    /// Scan the (T1, T2) plane under thermal relaxation.
    RelaxScan(RelaxArgs),
    /// Fit a scaling law to thresholds or explicit points.
    Fit(FitArgs),
    /// Evaluate a saved fit at a larger n.
    Extrapolate(ExtrapolateArgs),
    /// Merge threshold CSVs from a directory into one table.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// sga, sgaa, m1ga, m1gaa, m2ga or m2gaa.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    qubits: Option<usize>,
    /// Marked bitstring, MSB first (defaults to all ones).
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// auto, density or trajectory.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// bf, pf, bpf, dep, ad, pd or thermal.
    #[arg(long)]
    error: Option<String>,
    /// Error probability for gate-error families.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    t2: Option<f64>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[command(flatten)]
    common: Common,
    /// One family or a comma-separated list.
    #[arg(long)]
    error: Option<String>,
    /// lo:hi:points, logarithmic.
    #[arg(long)]
    grid: Option<String>,
    /// Gate classes that receive noise: 1q, 2q or both (comma-separated).
    #[arg(long, value_delimiter = ',')]
    scope: Vec<String>,
    /// Restrict noise to these qubits.
    #[arg(long, value_delimiter = ',')]
    noisy_qubits: Vec<usize>,
}

#[derive(Args, Debug)]
struct RelaxArgs {
    #[command(flatten)]
    common: Common,
    /// T1 axis in µs, lo:hi:points.
    #[arg(long)]
    grid: Option<String>,
    /// T2 axis in µs (defaults to the T1 axis).
    #[arg(long)]
    t2_grid: Option<String>,
    /// Evaluate every pair instead of searching the band edges.
    #[arg(long)]
    full: bool,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Threshold CSV to fit.
    #[arg(long, conflicts_with = "points")]
    input: Option<PathBuf>,
    /// Explicit `n:value` pairs, comma-separated.
    #[arg(long, value_delimiter = ',')]
    points: Vec<String>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    error: Option<String>,
    /// exponential or power_exponential.
    #[arg(long, default_value = "exponential")]
    model: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExtrapolateArgs {
    /// Fit JSON written by `fit`.
    #[arg(long)]
    fit: PathBuf,
    /// Register sizes to evaluate at.
    #[arg(long = "at", value_delimiter = ',', required = true)]
    at: Vec<f64>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory holding threshold_*.csv files.
    #[arg(long, default_value = "out")]
    input: PathBuf,
    /// Combined CSV (defaults to `<input>/thresholds.csv`).
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Flag values merged with the config file.
struct Resolved {
    config: GroverConfig,
    shots: u64,
    seed: u64,
    backend: BackendChoice,
}

fn resolve(common: &Common, file: &FileConfig) -> Result<Resolved> {
    let algo = match common.algo.as_deref() {
        Some(s) => Some(s.parse::<Algorithm>()?),
        None => file.algo,
    };
    let qubits = common.qubits.or(file.qubits);
    let mut config = match (algo, &file.grover) {
        (Some(a), _) => {
            let n = qubits
                .or(file.grover.as_ref().map(|g| g.n_qubits))
                .ok_or_else(|| anyhow!("--qubits is required"))?;
            GroverConfig::for_algorithm(a, n)
        }
        (None, Some(g)) => {
            let mut g = g.clone();
            if let Some(n) = qubits {
                if n != g.n_qubits {
                    bail!("--qubits {n} conflicts with the configured circuit ({} qubits)", g.n_qubits);
                }
            }
            g.n_qubits = qubits.unwrap_or(g.n_qubits);
            g
        }
        (None, None) => bail!("--algo is required"),
    };
    if let Some(t) = common.target.as_ref().or(file.target.as_ref()) {
        config = config.with_target(t);
    }
    config.validate()?;
    let backend = match common.backend.as_deref() {
        Some(s) => s.parse()?,
        None => file.backend.unwrap_or(BackendChoice::Auto),
    };
    Ok(Resolved {
        config,
        shots: common.shots.or(file.shots).unwrap_or(DEFAULT_SHOTS),
        seed: common.seed.or(file.seed).unwrap_or(0),
        backend,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(args: RunArgs, file: &FileConfig) -> Result<()> {
    let r = resolve(&args.common, file)?;
    let error = args.error.as_deref().or(file.error.as_deref());
    let model = match error {
        None => file.noise.clone().unwrap_or_default(),
        Some(e) => match e.parse::<ErrorKind>()? {
            ErrorKind::Thermal => {
                let (t1, t2) = args.t1.zip(args.t2).ok_or_else(|| anyhow!("thermal noise needs --t1 and --t2"))?;
                NoiseModel::thermal(t1, t2)
            }
            kind => {
                let p = args.p.ok_or_else(|| anyhow!("--error {kind} needs --p"))?;
                NoiseModel::uniform(kind, p).expect("gate-error family")
            }
        },
    };
    model.validate()?;
    let experiment = Experiment::new(r.config)?;
    let dist = experiment.run(&model, r.shots, r.backend, r.seed)?;
    let sel = selectivity(&dist, &experiment.config.target)?;
    let path = args
        .common
        .out
        .join(format!("run_{}_{}.json", experiment.label, experiment.config.n_qubits));
    write_file(&path, &dist.to_json())?;
    println!("S = {:.4} (P_t = {:.6}, P_hn = {:.6}) -> {}", sel.s, sel.p_t, sel.p_hn, path.display());
    Ok(())
}

fn parse_scope(raw: &[String]) -> Result<Option<Vec<GateClass>>> {
    if raw.is_empty() {
        return Ok(None);
    }
    raw.iter()
        .map(|s| match s.trim() {
            "1q" => Ok(GateClass::OneQubit),
            "2q" => Ok(GateClass::TwoQubit),
            other => Err(anyhow!("unknown gate scope '{other}' (expected 1q or 2q)")),
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// `dep`, `dep-2q`, `dep-q0` and so on.
fn scoped_label(kind: ErrorKind, scope: &Option<Vec<GateClass>>, qubits: &[usize]) -> String {
    let mut label = kind.name().to_string();
    if let Some(s) = scope.as_ref().filter(|s| s.len() == 1) {
        label.push_str(if s[0] == GateClass::OneQubit { "-1q" } else { "-2q" });
    }
    if !qubits.is_empty() {
        let q: Vec<String> = qubits.iter().map(usize::to_string).collect();
        label.push_str(&format!("-q{}", q.join("_")));
    }
    label
}

fn threshold(args: ThresholdArgs, file: &FileConfig) -> Result<()> {
    let r = resolve(&args.common, file)?;
    let errors = args
        .error
        .as_deref()
        .or(file.error.as_deref())
        .ok_or_else(|| anyhow!("--error is required"))?;
    let grid_spec = args.grid.as_deref().or(file.grid.as_deref()).unwrap_or("1e-5:1e-1:9");
    let grid = parse_grid(grid_spec)?;
    let scope = parse_scope(&args.scope)?;
    let experiment = Experiment::new(r.config)?;
    let n = experiment.config.n_qubits;
    for e in errors.split(',') {
        let kind: ErrorKind = e.trim().parse()?;
        if kind == ErrorKind::Thermal {
            bail!("thermal noise has no single strength; use relax-scan");
        }
        let make = |p: f64| {
            let mut rule = NoiseRule::everywhere(kind.family(p).expect("gate-error family"));
            if let Some(s) = &scope {
                rule = rule.with_gate_scope(s);
            }
            if !args.noisy_qubits.is_empty() {
                rule = rule.on_qubits(&args.noisy_qubits);
            }
            NoiseModel::single(rule)
        };
        make(grid[0]).validate()?;
        let label = scoped_label(kind, &scope, &args.noisy_qubits);
        let result = find_threshold_with(&experiment, &label, make, &grid, r.shots, r.backend, r.seed)?;
        let stem = format!("{}_{}_{}", experiment.label, n, label);
        let out = &args.common.out;
        report::write_threshold_csv(std::slice::from_ref(&result), &out.join(format!("threshold_{stem}.csv")))?;
        report::write_samples_csv(std::slice::from_ref(&result), &out.join(format!("samples_{stem}.csv")))?;
        println!("{} n={} {}: threshold {:.4e}", result.algorithm, n, label, result.threshold);
    }
    Ok(())
}

fn relax_scan(args: RelaxArgs, file: &FileConfig) -> Result<()> {
    let r = resolve(&args.common, file)?;
    let t1_grid = match args.grid.as_deref().or(file.grid.as_deref()) {
        Some(g) => parse_grid(g)?,
        None => log_grid(10.0, 10_000.0, 8)?,
    };
    let t2_grid = match args.t2_grid.as_deref().or(file.t2_grid.as_deref()) {
        Some(g) => parse_grid(g)?,
        None => t1_grid.clone(),
    };
    let experiment = Experiment::new(r.config)?;
    let scan = if args.full {
        relaxation_scan(&experiment, &t1_grid, &t2_grid, r.shots, r.backend, r.seed)?
    } else {
        relaxation_scan_pruned(&experiment, &t1_grid, &t2_grid, r.shots, r.backend, r.seed)?
    };
    let path = args.common.out.join(format!("relax_{}_{}.csv", scan.algorithm, scan.n));
    report::write_relax_csv(&scan, &path)?;
    let qualifying = scan.qualifying();
    match scan.qualifying_means() {
        Some((t1, t2)) => println!(
            "{} of {} points qualify; mean T1 = {t1:.1} us, T2 = {t2:.1} us -> {}",
            qualifying.len(),
            scan.evaluated.len(),
            path.display()
        ),
        None => println!("no qualifying points among {} -> {}", scan.evaluated.len(), path.display()),
    }
    Ok(())
}

fn parse_points(raw: &[String]) -> Result<Vec<(f64, f64)>> {
    raw.iter()
        .map(|s| {
            let (n, y) = s.split_once(':').ok_or_else(|| anyhow!("point '{s}' is not n:value"))?;
            Ok((n.trim().parse()?, y.trim().parse()?))
        })
        .collect()
}

fn fit(args: FitArgs, file: &FileConfig) -> Result<()> {
    let model: FitModel = args.model.parse()?;
    let points = if let Some(input) = &args.input {
        let algo = args
            .algo
            .clone()
            .or(file.algo.map(|a| a.name().to_string()))
            .ok_or_else(|| anyhow!("--algo selects the rows to fit"))?;
        let error = args
            .error
            .clone()
            .or(file.error.clone())
            .ok_or_else(|| anyhow!("--error selects the rows to fit"))?;
        let rows: Vec<ThresholdResult> = read_threshold_csv(input)?
            .into_iter()
            .filter(|t| t.algorithm == algo && t.error_type == error)
            .collect();
        rows.iter().map(|t| (t.n as f64, t.threshold)).collect()
    } else if !args.points.is_empty() {
        parse_points(&args.points)?
    } else {
        bail!("give --input or --points");
    };
    let result = fit_scaling(&points, model)?;
    let path = args.out.join("fit.json");
    report::write_fit_json(&result, &path)?;
    match result.c {
        Some(c) => println!("a = {:.6e}, b = {:.6}, c = {:.6}, R^2 = {:.6}", result.a, result.b, c, result.r2),
        None => println!("a = {:.6e}, b = {:.6}, R^2 = {:.6}", result.a, result.b, result.r2),
    }
    println!("-> {}", path.display());
    Ok(())
}

fn extrapolate_cmd(args: ExtrapolateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.fit).with_context(|| format!("reading {}", args.fit.display()))?;
    let fit = FitResult::from_json(&text)?;
    for n in args.at {
        println!("{n}\t{:.6e}", extrapolate(&fit, n)?);
    }
    Ok(())
}

fn report_cmd(args: ReportArgs) -> Result<()> {
    let mut files: Vec<PathBuf> = fs::read_dir(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("threshold_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    let mut rows = Vec::new();
    for f in &files {
        rows.extend(read_threshold_csv(f)?);
    }
    if rows.is_empty() {
        bail!("no threshold_*.csv files in {}", args.input.display());
    }
    rows.sort_by(|a, b| {
        (a.algorithm.as_str(), a.error_type.as_str(), a.n).cmp(&(b.algorithm.as_str(), b.error_type.as_str(), b.n))
    });
    let output = args.output.unwrap_or_else(|| args.input.join("thresholds.csv"));
    report::write_threshold_csv(&rows, &output)?;
    println!("{:<8}{:>4}  {:<12}{:>12}", "algo", "n", "error", "threshold");
    for t in &rows {
        println!("{:<8}{:>4}  {:<12}{:>12.4e}", t.algorithm, t.n, t.error_type, t.threshold);
    }
    println!("-> {}", output.display());
    Ok(())
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("GROVER_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| anyhow!("GROVER_LAB_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    init_threads()?;
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Run(a) => run(a, &file),
        Command::Threshold(a) => threshold(a, &file),
        Command::RelaxScan(a) => relax_scan(a, &file),
        Command::Fit(a) => fit(a, &file),
        Command::Extrapolate(a) => extrapolate_cmd(a),
        Command::Report(a) => report_cmd(a),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
