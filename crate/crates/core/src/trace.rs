//! Event traces, their JSON Lines encoding, and replay.
//!
//! A trace file is one header line (the full run configuration) followed by
//! one line per event. The encoding contains no floating point, so a fixed
//! input produces the same bytes everywhere.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Label, Mode};
use crate::algorithms::{Action, HelpEffect};
use crate::engine::{self, EngineError, RunConfig};
use crate::graph::{InitialPlacement, NodeId, PortLabeledGraph};

pub const TRACE_FORMAT: &str = "dispersion-trace/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutexRecord {
    pub contenders: Vec<Label>,
    pub winner: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub event_no: u64,
    /// Round number; synchronous runs only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<u64>,
    /// Scheduling decision that produced the event; asynchronous runs only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<u64>,
    pub robot: Label,
    /// Simulation-internal node index, for auditing.
    pub node: NodeId,
    pub mode_before: Mode,
    pub mode_after: Mode,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutex: Option<MutexRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub help: Vec<HelpEffect>,
}

pub trait TraceSink {
    /// Whether events should be built at all.
    fn enabled(&self) -> bool {
        true
    }

    fn record(&mut self, event: &TraceEvent);
}

impl TraceSink for Vec<TraceEvent> {
    fn record(&mut self, event: &TraceEvent) {
        self.push(event.clone());
    }
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn enabled(&self) -> bool {
        false
    }

    fn record(&mut self, _event: &TraceEvent) {}
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub config: RunConfig,
    pub seed: Option<u64>,
    pub placement: InitialPlacement,
    pub graph: PortLabeledGraph,
}

impl TraceHeader {
    pub fn new(
        graph: &PortLabeledGraph,
        placement: &InitialPlacement,
        config: &RunConfig,
        seed: Option<u64>,
    ) -> Self {
        Self {
            format: TRACE_FORMAT.to_owned(),
            config: config.clone(),
            seed,
            placement: placement.clone(),
            graph: graph.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported trace format `{0}`")]
    Format(String),
    #[error("recorded graph is invalid: {0}")]
    Graph(#[from] crate::graph::GraphError),
    #[error("re-execution failed: {0}")]
    Engine(#[from] EngineError),
}

/// Serializes a header and its events as JSON Lines.
pub fn to_json_lines(header: &TraceHeader, events: &[TraceEvent]) -> String {
    let mut out = serde_json::to_string(header).expect("header serializes");
    out.push('\n');
    for e in events {
        writeln!(
            out,
            "{}",
            serde_json::to_string(e).expect("event serializes")
        )
        .unwrap();
    }
    out
}

pub fn parse_json_lines(text: &str) -> Result<(TraceHeader, Vec<TraceEvent>), TraceError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(TraceError::Empty)?;
    let header: TraceHeader =
        serde_json::from_str(first).map_err(|source| TraceError::Malformed { line: 1, source })?;
    if header.format != TRACE_FORMAT {
        return Err(TraceError::Format(header.format));
    }
    let events = lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| TraceError::Malformed {
                line: i + 1,
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok((header, events))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayStatus {
    Identical {
        events: usize,
    },
    /// First event index whose encoding differs; `None` on either side means
    /// that trace ended first.
    Diverged {
        index: usize,
        recorded: Option<String>,
        replayed: Option<String>,
    },
}

/// Re-executes the run described by a trace's header and compares every
/// event line byte for byte.
pub fn replay(text: &str) -> Result<ReplayStatus, TraceError> {
    let (header, _) = parse_json_lines(text)?;
    header.graph.validate()?;
    let mut fresh = Vec::new();
    engine::run(&header.graph, &header.placement, &header.config, &mut fresh)?;
    let recorded: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .collect();
    let replayed: Vec<String> = fresh
        .iter()
        .map(|e| serde_json::to_string(e).expect("event serializes"))
        .collect();
    for i in 0..recorded.len().max(replayed.len()) {
        let a = recorded.get(i).copied();
        let b = replayed.get(i).map(String::as_str);
        if a != b {
            return Ok(ReplayStatus::Diverged {
                index: i,
                recorded: a.map(str::to_owned),
                replayed: b.map(str::to_owned),
            });
        }
    }
    Ok(ReplayStatus::Identical {
        events: replayed.len(),
    })
}
