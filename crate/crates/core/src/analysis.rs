//! Run reports and the executable bound checks.
//!
//! All checks are exact integer comparisons.

use serde::{Deserialize, Serialize};

use crate::agents::{helping_memory_cap, independent_memory_cap, Label, Mode};
use crate::algorithms::Action;
use crate::engine::{AlgorithmKind, WorldState};
use crate::graph::{build_graph, InitialPlacement, NodeId, PortAssignment, PortLabeledGraph};
use crate::trace::TraceEvent;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotStats {
    pub label: Label,
    pub start: NodeId,
    pub final_node: NodeId,
    /// Edge traversals.
    pub moves: u64,
    /// Active loop iterations executed.
    pub iterations: u64,
    /// Round (sync) or event index (async) of docking.
    pub settle_time: Option<u64>,
    pub peak_memory_bits: u64,
    /// Independent family only.
    pub peak_stack_depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: AlgorithmKind,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub max_degree: u32,
    pub seed: Option<u64>,
    pub dispersed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds_elapsed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events_elapsed: Option<u64>,
    /// `4m - 2(n-1)`, equal to the traversal count `4(m-(n-1)) + 2(n-1)`.
    pub loop_bound: u64,
    pub robots: Vec<RobotStats>,
    pub mutex_arbitrations: u64,
    /// Arbitrations with more than one contender.
    pub mutex_contentions: u64,
}

impl RunReport {
    pub fn rounds_or_events(&self) -> u64 {
        self.rounds_elapsed.or(self.events_elapsed).unwrap_or(0)
    }

    pub fn max_moves(&self) -> u64 {
        self.robots.iter().map(|r| r.moves).max().unwrap_or(0)
    }

    pub fn max_memory_bits(&self) -> u64 {
        self.robots
            .iter()
            .map(|r| r.peak_memory_bits)
            .max()
            .unwrap_or(0)
    }

    pub fn max_stack_depth(&self) -> Option<usize> {
        self.robots.iter().filter_map(|r| r.peak_stack_depth).max()
    }
}

/// True iff every robot is settled and no two share a node.
pub fn check_dispersion(world: &WorldState) -> bool {
    let mut occupied = vec![false; world.docked.len()];
    for r in world.real_robots() {
        if r.state.mode() != Mode::Settled || std::mem::replace(&mut occupied[r.position], true) {
            return false;
        }
    }
    true
}

/// Synchronous: every robot docked within rounds `0..=L`. Asynchronous:
/// every robot ran at most `L + 1` active iterations.
pub fn check_time_bound(report: &RunReport) -> bool {
    let bound = report.loop_bound;
    if report.algorithm.is_sync() {
        report
            .robots
            .iter()
            .all(|r| r.settle_time.is_some_and(|t| t <= bound))
    } else {
        report.robots.iter().all(|r| r.iterations <= bound + 1)
    }
}

/// Closed-form per-robot memory maximum for the report's algorithm family.
pub fn memory_cap(algorithm: AlgorithmKind, k: usize, max_degree: u32, m: usize) -> u64 {
    if algorithm.is_helping() {
        helping_memory_cap(k, max_degree, m)
    } else {
        independent_memory_cap(k, max_degree)
    }
}

pub fn check_memory_bound(report: &RunReport, k: usize, max_degree: u32, m: usize) -> bool {
    let cap = memory_cap(report.algorithm, k, max_degree, m);
    report.robots.iter().all(|r| r.peak_memory_bits <= cap)
}

/// Independent family: no stack ever held more than `k - 1` ports.
pub fn check_stack_bound(report: &RunReport) -> bool {
    report.max_stack_depth().is_none_or(|d| d < report.k.max(1))
}

/// Classic depth-first traversal of a port-labeled graph from `start`.
///
/// At every node ports are tried in increasing order starting just after
/// the entry port (from 0 at the start node) until the entry port comes
/// round again. An edge into an already visited node is walked and
/// immediately walked back. Returns the directed edges in walking order.
pub fn single_robot_dfs_oracle(graph: &PortLabeledGraph, start: NodeId) -> Vec<(NodeId, NodeId)> {
    fn visit(
        g: &PortLabeledGraph,
        v: NodeId,
        entry: Option<u32>,
        seen: &mut [bool],
        walk: &mut Vec<(NodeId, NodeId)>,
    ) {
        let d = g.degree(v);
        let first = entry.map_or(0, |e| e + 1);
        let count = if entry.is_some() {
            d.saturating_sub(1)
        } else {
            d
        };
        for i in 0..count {
            let p = (first + i) % d;
            let (u, q) = g.traverse(v, p);
            walk.push((v, u));
            if !seen[u] {
                seen[u] = true;
                visit(g, u, Some(q), seen, walk);
            }
            walk.push((u, v));
        }
    }
    let mut seen = vec![false; graph.node_count()];
    seen[start] = true;
    let mut walk = Vec::new();
    visit(graph, start, None, &mut seen, &mut walk);
    walk
}

/// Directed edges walked by `robot`, in order, recovered from a trace.
pub fn walk_from_trace(
    graph: &PortLabeledGraph,
    trace: &[TraceEvent],
    robot: Label,
) -> Vec<(NodeId, NodeId)> {
    trace
        .iter()
        .filter(|e| e.robot == robot)
        .filter_map(|e| match e.action {
            Action::Move(p) => Some((e.node, graph.traverse(e.node, p).0)),
            _ => None,
        })
        .collect()
}

/// Path on `k` nodes with all `k` robots at the end node 0.
pub fn lower_bound_fixture(k: usize) -> (PortLabeledGraph, InitialPlacement) {
    assert!(k >= 1);
    let edges: Vec<_> = (1..k).map(|v| (v - 1, v)).collect();
    let graph = build_graph(k, &edges, &PortAssignment::Canonical).expect("path is valid");
    (graph, InitialPlacement::colocated(k, 0))
}
