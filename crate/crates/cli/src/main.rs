//! `pfa`: principal feature analysis from the command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pfa_core::report::{features_text, to_json, RunReport};
use pfa_core::{
    generate, robust_intersection, Batching, DagSpec, Dataset, DofMode, PfaConfig, PfaSession,
    Scenario, SynthSpec,
};

#[derive(Parser)]
#[command(name = "pfa", version, about = "Principal feature analysis")]
struct Cli {
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select principal features of a dataset.
    Run(RunArgs),
    /// Intersect the selections of several runs on random subsamples.
    Robust(RobustArgs),
    /// Write a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct AnalysisArgs {
    /// CSV with one row per variable and one column per data point.
    #[arg(long)]
    input: PathBuf,
    /// Number of leading rows that are outputs.
    #[arg(long, default_value_t = 1)]
    n_outputs: usize,
    /// Minimum points per bin.
    #[arg(long)]
    nu: usize,
    /// Maximum features per batch.
    #[arg(long, default_value_t = 50)]
    ns: usize,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Keep only features whose mutual information with an output exceeds this (nats).
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_enum, default_value_t = BatchingArg::Ordered)]
    batching: BatchingArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Randomizes the choice among equally small cuts.
    #[arg(long)]
    tie_seed: Option<u64>,
    #[arg(long, default_value_t = 5.0)]
    min_expected: f64,
    #[arg(long, value_enum, default_value_t = DofArg::Independence)]
    dof_mode: DofArg,
    /// Output prefix.
    #[arg(long, default_value = "pfa")]
    out: PathBuf,
    /// Record wall-clock phase timings in the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Args)]
struct RobustArgs {
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Share of data points kept in each run.
    #[arg(long, default_value_t = 0.95)]
    fraction: f64,
}

#[derive(Args)]
struct SynthArgs {
    /// example1..example4, or dag for a random arithmetic DAG.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base variables of a dag scenario.
    #[arg(long, default_value_t = 50)]
    bases: usize,
    /// Derived variables of a dag scenario.
    #[arg(long, default_value_t = 450)]
    derived: usize,
    /// CSV file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BatchingArg {
    Ordered,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum DofArg {
    Independence,
    CellsMinusOne,
}

#[derive(Serialize)]
struct RunEcho<'a> {
    input: String,
    n_outputs: usize,
    #[serde(flatten)]
    pfa: &'a PfaConfig,
}

#[derive(Serialize)]
struct RobustEcho<'a> {
    #[serde(flatten)]
    run: RunEcho<'a>,
    runs: usize,
    fraction: f64,
}

#[derive(Serialize)]
struct RobustReport<'a> {
    config: RobustEcho<'a>,
    intersection: Vec<pfa_core::VariableId>,
    run_reports: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<BTreeMap<String, f64>>,
}

impl AnalysisArgs {
    fn config(&self) -> PfaConfig {
        PfaConfig {
            nu: self.nu,
            alpha: self.alpha,
            ns: self.ns,
            batching: match self.batching {
                BatchingArg::Ordered => Batching::Ordered,
                BatchingArg::Random => Batching::Random,
            },
            seed: self.seed,
            tie_seed: self.tie_seed,
            min_expected: self.min_expected,
            dof_mode: match self.dof_mode {
                DofArg::Independence => DofMode::Independence,
                DofArg::CellsMinusOne => DofMode::CellsMinusOne,
            },
            theta: self.theta,
        }
    }

    fn echo<'a>(&self, cfg: &'a PfaConfig) -> RunEcho<'a> {
        RunEcho {
            input: self.input.display().to_string(),
            n_outputs: self.n_outputs,
            pfa: cfg,
        }
    }

    fn load(&self) -> Result<Dataset> {
        Ok(Dataset::load_csv(&self.input, self.n_outputs)?)
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes every file or none: all contents are rendered before this is called.
fn write_all(files: &[(PathBuf, String)]) -> Result<()> {
    for (path, text) in files {
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let a = &args.analysis;
    let cfg = a.config();
    let start = Instant::now();
    let ds = a.load()?;
    let load_ms = ms(start);

    let t = Instant::now();
    let mut session = PfaSession::new(&ds, cfg.clone())?;
    let result = session.analyze()?;
    let analyze_ms = ms(t);

    let shape = (ds.n_points(), ds.n_features(), ds.n_outputs());
    let mut report = RunReport::new(a.echo(&cfg), shape, &result, Some(session.cache()));
    if a.timings {
        report.timings_ms = Some(BTreeMap::from([
            ("load".to_string(), load_ms),
            ("analyze".to_string(), analyze_ms),
            ("total".to_string(), ms(start)),
        ]));
    }
    write_all(&[
        (
            with_suffix(&a.out, ".features.txt"),
            features_text(result.selected()),
        ),
        (with_suffix(&a.out, ".report.json"), to_json(&report)),
    ])
}

fn cmd_robust(args: &RobustArgs) -> Result<()> {
    let a = &args.analysis;
    let cfg = a.config();
    let start = Instant::now();
    let ds = a.load()?;
    let robust = robust_intersection(&ds, &cfg, args.runs, args.fraction)?;
    let total_ms = ms(start);

    let mut files = Vec::new();
    let mut names = Vec::new();
    for (i, run) in robust.runs.iter().enumerate() {
        let path = with_suffix(&a.out, &format!(".run{}.report.json", i + 1));
        let n_points = ((ds.n_points() as f64) * args.fraction).round() as usize;
        let shape = (n_points, ds.n_features(), ds.n_outputs());
        let report = RunReport::new(a.echo(&run.config), shape, run, None);
        names.push(
            path.file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned(),
        );
        files.push((path, to_json(&report)));
    }
    let summary = RobustReport {
        config: RobustEcho {
            run: a.echo(&cfg),
            runs: args.runs,
            fraction: args.fraction,
        },
        intersection: robust.intersection.iter().copied().collect(),
        run_reports: names,
        timings_ms: a
            .timings
            .then(|| BTreeMap::from([("total".to_string(), total_ms)])),
    };
    files.push((
        with_suffix(&a.out, ".features.txt"),
        features_text(&robust.intersection),
    ));
    files.push((with_suffix(&a.out, ".report.json"), to_json(&summary)));
    write_all(&files)
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let scenario = match args.scenario.as_str() {
        "dag" => {
            if args.bases < 1 {
                bail!("a dag scenario needs at least one base variable");
            }
            Scenario::Custom(DagSpec::random(args.bases, args.derived, args.seed))
        }
        name => name.parse()?,
    };
    let ds = generate(&SynthSpec::new(scenario, args.n, args.seed))?;
    write_all(&[(args.out.clone(), ds.to_csv())])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global();
    if let Err(e) = pool {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Robust(args) => cmd_robust(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
