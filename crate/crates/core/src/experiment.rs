//! Batch experiments: configuration, repetition, aggregate summaries and
//! CSV export.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{check_memory_bound, check_stack_bound, check_time_bound, RunReport};
use crate::engine::{
    self, AlgorithmKind, EngineError, MutexPolicy, RunConfig, RunOutcome, SchedulerPolicy,
};
use crate::graph::{generate, GraphError, GraphFamily, InitialPlacement, NodeId, PortLabeledGraph};
use crate::trace::{to_json_lines, NullSink, TraceHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementMode {
    Colocated(NodeId),
    Random,
    Distinct,
}

impl FromStr for PlacementMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("colocated", node)) => node
                .parse()
                .map(PlacementMode::Colocated)
                .map_err(|_| format!("bad node in placement `{s}`")),
            None if s == "colocated" => Ok(PlacementMode::Colocated(0)),
            None if s == "random" => Ok(PlacementMode::Random),
            None if s == "distinct" => Ok(PlacementMode::Distinct),
            _ => Err(format!("unknown placement `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerChoice {
    RoundRobin,
    Random,
    Adversarial,
}

impl FromStr for SchedulerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "round-robin" => Ok(SchedulerChoice::RoundRobin),
            "random" => Ok(SchedulerChoice::Random),
            "adversarial" => Ok(SchedulerChoice::Adversarial),
            other => Err(format!("unknown scheduler `{other}`")),
        }
    }
}

impl fmt::Display for SchedulerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulerChoice::RoundRobin => "round-robin",
            SchedulerChoice::Random => "random",
            SchedulerChoice::Adversarial => "adversarial",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmKind,
    pub family: GraphFamily,
    pub n: usize,
    pub m: Option<usize>,
    pub k: usize,
    pub placement: PlacementMode,
    /// Asynchronous algorithms only; defaults to round-robin.
    pub scheduler: Option<SchedulerChoice>,
    pub mutex: MutexPolicy,
    pub seed: u64,
    pub reps: usize,
    pub keep_traces: bool,
}

impl ExperimentConfig {
    pub fn new(algorithm: AlgorithmKind, family: GraphFamily, n: usize, k: usize) -> Self {
        Self {
            algorithm,
            family,
            n,
            m: None,
            k,
            placement: PlacementMode::Colocated(0),
            scheduler: None,
            mutex: MutexPolicy::LowestLabel,
            seed: 0,
            reps: 1,
            keep_traces: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::Invalid("k must be at least 1".into()));
        }
        if self.k > self.n {
            return Err(ConfigError::Invalid(format!(
                "k = {} exceeds n = {}",
                self.k, self.n
            )));
        }
        if self.reps == 0 {
            return Err(ConfigError::Invalid("reps must be at least 1".into()));
        }
        if self.algorithm.is_sync() && self.scheduler.is_some() {
            return Err(ConfigError::Invalid(format!(
                "--scheduler applies only to asynchronous algorithms, not {}",
                self.algorithm
            )));
        }
        if self.family == GraphFamily::Gnm && self.m.is_none() {
            return Err(ConfigError::Invalid("gnm requires --m".into()));
        }
        if self.family != GraphFamily::Gnm && self.m.is_some() {
            return Err(ConfigError::Invalid("--m applies only to gnm".into()));
        }
        if let PlacementMode::Colocated(v) = self.placement {
            if v >= self.n {
                return Err(ConfigError::Invalid(format!(
                    "colocated node {v} is not below n = {}",
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Seed of repetition `rep`.
    pub fn run_seed(&self, rep: usize) -> u64 {
        self.seed.wrapping_add(rep as u64)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("graph generation failed: {0}")]
    Graph(#[from] GraphError),
    #[error("run {run_id} aborted: {source}")]
    Engine {
        run_id: usize,
        #[source]
        source: EngineError,
    },
}

/// Derives independent sub-seeds from a run seed (SplitMix64 finalizer).
fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run_id: usize,
    pub report: RunReport,
    pub time_ok: bool,
    pub memory_ok: bool,
    pub stack_ok: bool,
    /// JSON Lines trace, when requested.
    pub trace: Option<String>,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.report.dispersed && self.time_ok && self.memory_ok && self.stack_ok
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub dispersed: usize,
    pub bound_violations: usize,
    pub max_rounds_or_events: u64,
    pub max_moves: u64,
    pub max_memory_bits: u64,
    pub max_stack_depth: Option<usize>,
    pub failed_runs: Vec<usize>,
}

impl Summary {
    pub fn from_records(records: &[RunRecord]) -> Self {
        Self {
            runs: records.len(),
            dispersed: records.iter().filter(|r| r.report.dispersed).count(),
            bound_violations: records
                .iter()
                .filter(|r| !(r.time_ok && r.memory_ok && r.stack_ok))
                .count(),
            max_rounds_or_events: records
                .iter()
                .map(|r| r.report.rounds_or_events())
                .max()
                .unwrap_or(0),
            max_moves: records
                .iter()
                .map(|r| r.report.max_moves())
                .max()
                .unwrap_or(0),
            max_memory_bits: records
                .iter()
                .map(|r| r.report.max_memory_bits())
                .max()
                .unwrap_or(0),
            max_stack_depth: records
                .iter()
                .filter_map(|r| r.report.max_stack_depth())
                .max(),
            failed_runs: records
                .iter()
                .filter(|r| !r.ok())
                .map(|r| r.run_id)
                .collect(),
        }
    }

    pub fn all_ok(&self) -> bool {
        self.failed_runs.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

/// Executes every repetition. Runs are independent and may execute in
/// parallel; results come back in run order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ConfigError> {
    config.validate()?;
    let records = (0..config.reps)
        .into_par_iter()
        .map(|rep| run_one(config, rep))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = Summary::from_records(&records);
    Ok(ExperimentResult { records, summary })
}

/// Everything needed to execute one repetition.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub run_id: usize,
    pub seed: u64,
    pub graph: PortLabeledGraph,
    pub placement: InitialPlacement,
    pub config: RunConfig,
}

impl RunSetup {
    pub fn header(&self) -> TraceHeader {
        TraceHeader::new(&self.graph, &self.placement, &self.config, Some(self.seed))
    }

    /// Runs with tracing. The JSON Lines text is returned even when the
    /// engine aborts, holding every event up to the failure.
    pub fn record(&self) -> (String, Result<RunOutcome, EngineError>) {
        let mut events = Vec::new();
        let outcome = engine::run(&self.graph, &self.placement, &self.config, &mut events);
        (to_json_lines(&self.header(), &events), outcome)
    }
}

/// Derives repetition `run_id`'s graph, placement and policies.
pub fn setup_run(config: &ExperimentConfig, run_id: usize) -> Result<RunSetup, ConfigError> {
    let seed = config.run_seed(run_id);
    let graph = generate(config.family, config.n, config.m, sub_seed(seed, 1))?;
    let placement = match config.placement {
        PlacementMode::Colocated(v) => InitialPlacement::colocated(config.k, v),
        PlacementMode::Random => InitialPlacement::random(config.k, config.n, sub_seed(seed, 2)),
        PlacementMode::Distinct => {
            InitialPlacement::distinct(config.k, config.n, sub_seed(seed, 2))
        }
    };
    let scheduler = match config.scheduler.unwrap_or(SchedulerChoice::RoundRobin) {
        SchedulerChoice::RoundRobin => SchedulerPolicy::RoundRobin,
        SchedulerChoice::Random => SchedulerPolicy::SeededRandom {
            seed: sub_seed(seed, 3),
        },
        SchedulerChoice::Adversarial => {
            SchedulerPolicy::adversarial_from_seed(config.k, sub_seed(seed, 3))
        }
    };
    Ok(RunSetup {
        run_id,
        seed,
        graph,
        placement,
        config: RunConfig::new(config.algorithm)
            .with_mutex(config.mutex)
            .with_scheduler(scheduler),
    })
}

fn run_one(config: &ExperimentConfig, run_id: usize) -> Result<RunRecord, ConfigError> {
    let setup = setup_run(config, run_id)?;
    let engine_err = |source| ConfigError::Engine { run_id, source };
    let (outcome, trace) = if config.keep_traces {
        let (text, outcome) = setup.record();
        (outcome.map_err(engine_err)?, Some(text))
    } else {
        let outcome = engine::run(&setup.graph, &setup.placement, &setup.config, &mut NullSink)
            .map_err(engine_err)?;
        (outcome, None)
    };
    let mut report = outcome.report;
    report.seed = Some(setup.seed);
    Ok(RunRecord {
        run_id,
        time_ok: check_time_bound(&report),
        memory_ok: check_memory_bound(&report, report.k, report.max_degree, report.m),
        stack_ok: check_stack_bound(&report),
        report,
        trace,
    })
}

pub const CSV_COLUMNS: [&str; 13] = [
    "run_id",
    "algorithm",
    "n",
    "m",
    "k",
    "delta",
    "seed",
    "dispersed",
    "rounds_or_events",
    "max_moves",
    "max_memory_bits",
    "max_stack_depth",
    "mutex_contentions",
];

pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

/// One CSV row; `max_stack_depth` is empty for the helping family.
pub fn csv_row(run_id: usize, report: &RunReport) -> String {
    [
        run_id.to_string(),
        report.algorithm.to_string(),
        report.n.to_string(),
        report.m.to_string(),
        report.k.to_string(),
        report.max_degree.to_string(),
        report.seed.map(|s| s.to_string()).unwrap_or_default(),
        report.dispersed.to_string(),
        report.rounds_or_events().to_string(),
        report.max_moves().to_string(),
        report.max_memory_bits().to_string(),
        report
            .max_stack_depth()
            .map(|d| d.to_string())
            .unwrap_or_default(),
        report.mutex_contentions.to_string(),
    ]
    .join(",")
}
