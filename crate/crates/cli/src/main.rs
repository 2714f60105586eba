//! `dispersion`: batch runner, trace replayer and graph generator.
//!
//! Exit status is 0 when every run dispersed within its bounds, 1 on any
//! failed run or replay divergence, 2 on usage or configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dispersion_core::engine::{AlgorithmKind, MutexPolicy};
use dispersion_core::experiment::{
    csv_header, csv_row, run_experiment, setup_run, ConfigError, ExperimentConfig,
    ExperimentResult, PlacementMode, SchedulerChoice,
};
use dispersion_core::graph::{generate, write_graph, GraphFamily};
use dispersion_core::trace::{replay, ReplayStatus};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "dispersion",
    version,
    about = "Mobile-robot dispersion on anonymous port-labeled graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repetitions of one configuration and check every bound.
    Run(RunArgs),
    /// Re-execute a recorded trace and compare it event by event.
    Replay {
        /// JSON Lines trace written by `run --trace`.
        trace: PathBuf,
    },
    /// Print a generated graph in the plain-text graph format.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// helping-sync, helping-async, independent-sync or independent-async.
    #[arg(long)]
    algorithm: AlgorithmKind,
    /// line, ring, complete, tree, grid or gnm.
    #[arg(long = "graph")]
    family: GraphFamily,
    #[arg(long)]
    n: usize,
    /// Edge count, gnm only.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: usize,
    /// colocated, colocated:NODE, random or distinct.
    #[arg(long, default_value = "colocated")]
    placement: PlacementMode,
    /// Base seed; repetition i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// round-robin, random or adversarial (asynchronous algorithms only,
    /// default round-robin).
    #[arg(long)]
    scheduler: Option<SchedulerChoice>,
    /// lowest-label or earliest-arrival.
    #[arg(long, default_value = "lowest-label")]
    mutex: MutexPolicy,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Directory for per-run reports and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-run JSON Lines traces.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long = "graph")]
    family: GraphFamily,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Replay { trace } => cmd_replay(&trace),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let config = ExperimentConfig {
        algorithm: args.algorithm,
        family: args.family,
        n: args.n,
        m: args.m,
        k: args.k,
        placement: args.placement,
        scheduler: args.scheduler,
        mutex: args.mutex,
        seed: args.seed,
        reps: args.reps,
        keep_traces: args.trace.is_some(),
    };
    let result = match run_experiment(&config) {
        Ok(r) => r,
        Err(e @ (ConfigError::Invalid(_) | ConfigError::Graph(_))) => return Ok(usage_error(e)),
        Err(ConfigError::Engine { run_id, source }) => {
            let path = dump_failed_trace(&config, run_id, &args)?;
            eprintln!("error: run {run_id} aborted: {source}");
            eprintln!("trace: {}", path.display());
            return Ok(ExitCode::from(EXIT_FAILED));
        }
    };

    if let Some(dir) = &args.trace {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &result.records {
            let text = r.trace.as_deref().expect("traces were kept");
            write(&trace_path(dir, r.run_id), text)?;
        }
    }
    emit_reports(&result, &args)?;

    let s = &result.summary;
    eprintln!(
        "{} runs, {} dispersed, {} bound violations, max rounds/events {}, max moves {}, max memory {} bits",
        s.runs, s.dispersed, s.bound_violations, s.max_rounds_or_events, s.max_moves, s.max_memory_bits
    );
    if s.all_ok() {
        return Ok(ExitCode::SUCCESS);
    }
    for &run_id in &s.failed_runs {
        let r = &result.records[run_id];
        let path = match &args.trace {
            Some(dir) => trace_path(dir, run_id),
            None => dump_failed_trace(&config, run_id, &args)?,
        };
        eprintln!(
            "run {run_id} failed (dispersed={}, time_ok={}, memory_ok={}, stack_ok={}): trace {}",
            r.report.dispersed,
            r.time_ok,
            r.memory_ok,
            r.stack_ok,
            path.display()
        );
    }
    Ok(ExitCode::from(EXIT_FAILED))
}

fn emit_reports(result: &ExperimentResult, args: &RunArgs) -> Result<()> {
    let summary = serde_json::to_string_pretty(&result.summary)? + "\n";
    let Some(dir) = &args.out else {
        match args.format {
            Format::Json => print!("{summary}"),
            Format::Csv => print!("{}", csv_text(result)),
        }
        return Ok(());
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    match args.format {
        Format::Json => {
            for r in &result.records {
                let text = serde_json::to_string_pretty(&r.report)? + "\n";
                write(&dir.join(format!("report-{:04}.json", r.run_id)), &text)?;
            }
        }
        Format::Csv => write(&dir.join("reports.csv"), &csv_text(result))?,
    }
    write(&dir.join("summary.json"), &summary)
}

fn csv_text(result: &ExperimentResult) -> String {
    let mut text = csv_header() + "\n";
    for r in &result.records {
        text += &csv_row(r.run_id, &r.report);
        text.push('\n');
    }
    text
}

fn trace_path(dir: &Path, run_id: usize) -> PathBuf {
    dir.join(format!("trace-{run_id:04}.jsonl"))
}

/// Re-records a failed run so the diagnostic can point at a trace file.
fn dump_failed_trace(config: &ExperimentConfig, run_id: usize, args: &RunArgs) -> Result<PathBuf> {
    let setup = setup_run(config, run_id)?;
    let (text, _) = setup.record();
    let dir = args
        .trace
        .clone()
        .or_else(|| args.out.clone())
        .unwrap_or_else(std::env::temp_dir);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("failed-trace-{run_id:04}.jsonl"));
    write(&path, &text)?;
    Ok(path)
}

fn cmd_replay(path: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match replay(&text) {
        Ok(ReplayStatus::Identical { events }) => {
            println!("identical: {events} events");
            Ok(ExitCode::SUCCESS)
        }
        Ok(ReplayStatus::Diverged {
            index,
            recorded,
            replayed,
        }) => {
            println!("diverged at event {index}");
            println!(
                "recorded: {}",
                recorded.as_deref().unwrap_or("<end of trace>")
            );
            println!(
                "replayed: {}",
                replayed.as_deref().unwrap_or("<end of run>")
            );
            Ok(ExitCode::from(EXIT_FAILED))
        }
        Err(e) => Ok(usage_error(format!("{}: {e}", path.display()))),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    match generate(args.family, args.n, args.m, args.seed) {
        Ok(g) => {
            print!("{}", write_graph(&g));
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => Ok(usage_error(e)),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
