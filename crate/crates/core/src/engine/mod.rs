//! Execution engines: a synchronous round engine and an asynchronous
//! discrete-event engine, sharing MUTEX arbitration and state bookkeeping.

mod asynchronous;
mod mutex;
mod scheduler;
mod sync;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use asynchronous::run_async;
pub use mutex::{arbitrate_mutex, Contender, MutexPolicy};
pub use scheduler::{default_fairness_bound, Scheduler, SchedulerPolicy};
pub use sync::{apply_moves_single_lane, run_sync, Arrival};

use crate::agents::{
    memory_bits_helping, memory_bits_independent, DockedArrays, HelpingState, IndependentState,
    Label, Mode, Port,
};
use crate::algorithms::{
    helping_async_step, helping_sync_step, independent_step, settled_service, Action, CoLocated,
    DockedView, HelpEffect, LocalView, Step, StepError, VisitRecord,
};
use crate::analysis::{RobotStats, RunReport};
use crate::graph::{InitialPlacement, NodeId, PlacementError, PortLabeledGraph};
use crate::trace::{MutexRecord, TraceEvent, TraceSink};

/// Default multiplier `C` in the asynchronous safety cap `C·k·(L+1)`.
pub const DEFAULT_SAFETY_FACTOR: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    HelpingSync,
    HelpingAsync,
    IndependentSync,
    IndependentAsync,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::HelpingSync,
        AlgorithmKind::HelpingAsync,
        AlgorithmKind::IndependentSync,
        AlgorithmKind::IndependentAsync,
    ];

    pub fn is_sync(self) -> bool {
        matches!(
            self,
            AlgorithmKind::HelpingSync | AlgorithmKind::IndependentSync
        )
    }

    pub fn is_helping(self) -> bool {
        matches!(
            self,
            AlgorithmKind::HelpingSync | AlgorithmKind::HelpingAsync
        )
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmKind::HelpingSync => "helping-sync",
            AlgorithmKind::HelpingAsync => "helping-async",
            AlgorithmKind::IndependentSync => "independent-sync",
            AlgorithmKind::IndependentAsync => "independent-async",
        })
    }
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|a| a.to_string() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// The loop bound `L = 4m - 2(n-1)`: synchronous rounds run `0..=L`.
pub fn loop_bound(graph: &PortLabeledGraph) -> u64 {
    (4 * graph.edge_count() + 2).saturating_sub(2 * graph.node_count()) as u64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: AlgorithmKind,
    pub mutex: MutexPolicy,
    /// Ignored by synchronous algorithms.
    pub scheduler: SchedulerPolicy,
    /// Defaults to `10k`.
    pub fairness_bound: Option<u64>,
    pub safety_factor: u64,
    /// Test harness: every MUTEX is won by a phantom robot that docks, so the
    /// real robots never settle and keep traversing.
    #[doc(hidden)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ghost_docking: bool,
}

impl RunConfig {
    pub fn new(algorithm: AlgorithmKind) -> Self {
        Self {
            algorithm,
            mutex: MutexPolicy::default(),
            scheduler: SchedulerPolicy::default(),
            fairness_bound: None,
            safety_factor: DEFAULT_SAFETY_FACTOR,
            ghost_docking: false,
        }
    }

    pub fn with_mutex(mut self, mutex: MutexPolicy) -> Self {
        self.mutex = mutex;
        self
    }

    pub fn with_scheduler(mut self, scheduler: SchedulerPolicy) -> Self {
        self.scheduler = scheduler;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("node already has docked robot {existing}")]
    DoubleDock { existing: Label },
    #[error("backtracking robot arrived at a node with no docked robot")]
    BacktrackTargetFree,
    #[error("robot in backtrack mode found at a free node")]
    BacktrackAtFreeNode,
    #[error("settled robot left the settled mode")]
    SettledLeft,
    #[error("settled robot emitted a move")]
    SettledMoved,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error("{algorithm} cannot run on the {engine} engine")]
    WrongEngine {
        algorithm: AlgorithmKind,
        engine: &'static str,
    },
    #[error("event {event}: robot {robot} at node {node}: {source}")]
    Step {
        event: u64,
        robot: Label,
        node: NodeId,
        #[source]
        source: StepError,
    },
    #[error("event {event}: robot {robot} at node {node}: {kind}")]
    Violation {
        event: u64,
        robot: Label,
        node: NodeId,
        kind: Violation,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RobotState {
    Helping(HelpingState),
    Independent(IndependentState),
}

impl RobotState {
    pub fn mode(&self) -> Mode {
        match self {
            RobotState::Helping(s) => s.core.mode,
            RobotState::Independent(s) => s.core.mode,
        }
    }

    pub fn port_entered(&self) -> Port {
        match self {
            RobotState::Helping(s) => s.core.port_entered,
            RobotState::Independent(s) => s.core.port_entered,
        }
    }

    pub fn stack_depth(&self) -> Option<usize> {
        match self {
            RobotState::Helping(_) => None,
            RobotState::Independent(s) => Some(s.stack_depth()),
        }
    }

    /// What this robot, if docked, tells `visitor`.
    fn view_for(&self, label: Label, visitor: Label) -> DockedView {
        let record = match self {
            RobotState::Helping(s) => s.docked.as_ref().map(|a| VisitRecord {
                visited: a.visited(visitor),
                entry_port: a.entry_port(visitor),
            }),
            RobotState::Independent(_) => None,
        };
        DockedView { label, record }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotSlot {
    pub state: RobotState,
    pub start: NodeId,
    pub position: NodeId,
    /// Port by which the robot entered `position`; `Port::NONE` at its start.
    pub entry_port: Port,
    pub arrival_index: u64,
    pub moves: u64,
    pub iterations: u64,
    pub settle_time: Option<u64>,
    pub peak_memory_bits: u64,
    pub peak_stack_depth: usize,
    /// Phantom MUTEX winner from the docking-disabled harness.
    pub ghost: bool,
}

/// Complete simulation configuration at a point in time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    /// Index `label - 1`; the first `k` entries are the real robots.
    pub robots: Vec<RobotSlot>,
    /// Docked robot per node.
    pub docked: Vec<Option<Label>>,
    pub k: usize,
}

impl WorldState {
    pub fn slot(&self, label: Label) -> &RobotSlot {
        &self.robots[label as usize - 1]
    }

    fn slot_mut(&mut self, label: Label) -> &mut RobotSlot {
        &mut self.robots[label as usize - 1]
    }

    pub fn real_robots(&self) -> &[RobotSlot] {
        &self.robots[..self.k]
    }

    pub fn all_settled(&self) -> bool {
        self.real_robots()
            .iter()
            .all(|r| r.state.mode() == Mode::Settled)
    }

    /// Unsettled real robots grouped by node, labels ascending.
    fn unsettled_by_node(&self) -> BTreeMap<NodeId, Vec<Label>> {
        let mut map: BTreeMap<NodeId, Vec<Label>> = BTreeMap::new();
        for (i, r) in self.real_robots().iter().enumerate() {
            if r.state.mode() != Mode::Settled {
                map.entry(r.position).or_default().push(i as Label + 1);
            }
        }
        map
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub world: WorldState,
}

/// Runs either engine according to the algorithm's timing model.
pub fn run(
    graph: &PortLabeledGraph,
    placement: &InitialPlacement,
    config: &RunConfig,
    sink: &mut dyn TraceSink,
) -> Result<RunOutcome, EngineError> {
    let mut sim = Simulation::new(graph, placement, config, sink)?;
    if config.algorithm.is_sync() {
        sync::drive(&mut sim)?;
    } else {
        asynchronous::drive(&mut sim)?;
    }
    Ok(sim.finish())
}

/// Shared mutable machinery for one run.
struct Simulation<'a> {
    graph: &'a PortLabeledGraph,
    config: &'a RunConfig,
    sink: &'a mut dyn TraceSink,
    world: WorldState,
    max_degree: u32,
    event_no: u64,
    elapsed: u64,
    arbitrations: u64,
    contentions: u64,
}

/// Result of computing one iteration, not yet applied.
struct Pending {
    robot: Label,
    node: NodeId,
    step: Step<RobotState>,
    mutex: Option<MutexRecord>,
}

impl<'a> Simulation<'a> {
    fn new(
        graph: &'a PortLabeledGraph,
        placement: &InitialPlacement,
        config: &'a RunConfig,
        sink: &'a mut dyn TraceSink,
    ) -> Result<Self, EngineError> {
        placement.validate(graph)?;
        let k = placement.robot_count();
        let label_space = if config.ghost_docking {
            k + graph.node_count()
        } else {
            k
        };
        let robots = placement
            .robot_positions
            .iter()
            .enumerate()
            .map(|(i, &start)| {
                let label = i as Label + 1;
                let state = if config.algorithm.is_helping() {
                    RobotState::Helping(HelpingState::new(label, label_space))
                } else {
                    RobotState::Independent(IndependentState::new(label, label_space))
                };
                RobotSlot {
                    state,
                    start,
                    position: start,
                    entry_port: Port::NONE,
                    arrival_index: 0,
                    moves: 0,
                    iterations: 0,
                    settle_time: None,
                    peak_memory_bits: 0,
                    peak_stack_depth: 0,
                    ghost: false,
                }
            })
            .collect();
        let mut sim = Simulation {
            graph,
            config,
            sink,
            world: WorldState {
                robots,
                docked: vec![None; graph.node_count()],
                k,
            },
            max_degree: graph.max_degree(),
            event_no: 0,
            elapsed: 0,
            arbitrations: 0,
            contentions: 0,
        };
        for label in 1..=k as Label {
            sim.update_peaks(label);
        }
        Ok(sim)
    }

    fn k(&self) -> usize {
        self.world.k
    }

    fn violation(&self, robot: Label, node: NodeId, kind: Violation) -> EngineError {
        EngineError::Violation {
            event: self.event_no,
            robot,
            node,
            kind,
        }
    }

    fn update_peaks(&mut self, label: Label) {
        let (k, delta, m) = (self.world.k, self.max_degree, self.graph.edge_count());
        let slot = self.world.slot_mut(label);
        let bits = match &slot.state {
            RobotState::Helping(s) => memory_bits_helping(s, k, delta, m),
            RobotState::Independent(s) => memory_bits_independent(s, k, delta),
        };
        slot.peak_memory_bits = slot.peak_memory_bits.max(bits);
        slot.peak_stack_depth = slot
            .peak_stack_depth
            .max(slot.state.stack_depth().unwrap_or(0));
    }

    /// Runs MUTEX among the given contenders at a free node. With ghost
    /// docking the winner is a fresh phantom robot, already docked.
    fn arbitrate(
        &mut self,
        node: NodeId,
        contenders: &[Label],
    ) -> Result<MutexRecord, EngineError> {
        for &c in contenders {
            if self.world.slot(c).state.mode() != Mode::Explore {
                return Err(self.violation(c, node, Violation::BacktrackAtFreeNode));
            }
        }
        self.arbitrations += 1;
        if contenders.len() > 1 {
            self.contentions += 1;
        }
        let winner = if self.config.ghost_docking {
            self.dock_ghost(node)
        } else {
            let entries: Vec<Contender> = contenders
                .iter()
                .map(|&label| {
                    let s = self.world.slot(label);
                    Contender {
                        label,
                        entry_port: s.entry_port,
                        arrival_index: s.arrival_index,
                    }
                })
                .collect();
            arbitrate_mutex(&entries, self.config.mutex)
        };
        Ok(MutexRecord {
            contenders: contenders.to_vec(),
            winner,
        })
    }

    fn dock_ghost(&mut self, node: NodeId) -> Label {
        let label = self.world.robots.len() as Label + 1;
        let label_space = self.k() + self.graph.node_count();
        let state = if self.config.algorithm.is_helping() {
            let mut s = HelpingState::new(label, label_space);
            s.core.mode = Mode::Settled;
            s.docked = Some(DockedArrays::new(label_space));
            RobotState::Helping(s)
        } else {
            let mut s = IndependentState::new(label, label_space);
            s.core.mode = Mode::Settled;
            RobotState::Independent(s)
        };
        self.world.robots.push(RobotSlot {
            state,
            start: node,
            position: node,
            entry_port: Port::NONE,
            arrival_index: 0,
            moves: 0,
            iterations: 0,
            settle_time: Some(self.elapsed),
            peak_memory_bits: 0,
            peak_stack_depth: 0,
            ghost: true,
        });
        self.world.docked[node] = Some(label);
        label
    }

    /// Computes `robot`'s next iteration from the current world.
    fn compute(&self, robot: Label, mutex: Option<MutexRecord>) -> Result<Pending, EngineError> {
        let slot = self.world.slot(robot);
        let node = slot.position;
        let docked = self.world.docked[node]
            .filter(|&d| d != robot)
            .map(|d| self.world.slot(d).state.view_for(d, robot));
        let co_located: Vec<CoLocated> = self
            .world
            .real_robots()
            .iter()
            .enumerate()
            .filter(|(i, r)| {
                *i as Label + 1 != robot && r.position == node && r.state.mode() != Mode::Settled
            })
            .map(|(i, r)| CoLocated {
                label: i as Label + 1,
                port_entered: r.entry_port,
            })
            .collect();
        let view = LocalView {
            degree: self.graph.degree(node),
            entry_port: slot.entry_port,
            docked,
            co_located: &co_located,
        };
        let winner = mutex.as_ref().map(|m| m.winner);
        let step = match (&slot.state, self.config.algorithm) {
            (RobotState::Helping(s), AlgorithmKind::HelpingSync) => {
                helping_sync_step(s.clone(), &view, winner).map(|st| st.map(RobotState::Helping))
            }
            (RobotState::Helping(s), _) => {
                helping_async_step(s.clone(), &view, winner).map(|st| st.map(RobotState::Helping))
            }
            (RobotState::Independent(s), _) => {
                independent_step(s.clone(), &view, winner).map(|st| st.map(RobotState::Independent))
            }
        }
        .map_err(|source| EngineError::Step {
            event: self.event_no,
            robot,
            node,
            source,
        })?;
        Ok(Pending {
            robot,
            node,
            step,
            mutex,
        })
    }

    /// Applies a computed iteration except for its move, which is returned.
    fn commit(
        &mut self,
        pending: Pending,
        round: Option<u64>,
        decision: Option<u64>,
    ) -> Result<Option<u32>, EngineError> {
        let Pending {
            robot,
            node,
            step,
            mutex,
        } = pending;
        let before = self.world.slot(robot).state.mode();
        let after = step.state.mode();
        if before == Mode::Settled && after != Mode::Settled {
            return Err(self.violation(robot, node, Violation::SettledLeft));
        }
        if after == Mode::Settled && matches!(step.action, Action::Move(_)) {
            return Err(self.violation(robot, node, Violation::SettledMoved));
        }
        if before != Mode::Settled && after == Mode::Settled {
            if let Some(existing) = self.world.docked[node] {
                return Err(self.violation(robot, node, Violation::DoubleDock { existing }));
            }
            self.world.docked[node] = Some(robot);
            self.world.slot_mut(robot).settle_time = Some(self.elapsed);
        }
        {
            let slot = self.world.slot_mut(robot);
            slot.state = step.state;
            slot.iterations += 1;
        }
        self.update_peaks(robot);
        for effect in &step.help {
            self.apply_help(effect);
        }
        if self.sink.enabled() {
            self.sink.record(&TraceEvent {
                event_no: self.event_no,
                round,
                decision,
                robot,
                node,
                mode_before: before,
                mode_after: after,
                action: step.action,
                mutex,
                help: step.help,
            });
        }
        self.event_no += 1;
        Ok(match step.action {
            Action::Move(p) => Some(p),
            _ => None,
        })
    }

    fn apply_help(&mut self, effect: &HelpEffect) {
        let host = self.world.slot_mut(effect.host);
        if let RobotState::Helping(s) = &host.state {
            let (_, _, next) = settled_service(s, effect.visitor, effect.port);
            host.state = RobotState::Helping(next);
        }
    }

    /// Moves `robot` through port `p`, returning its new node.
    fn move_robot(&mut self, robot: Label, p: u32, arrival_index: u64) -> NodeId {
        let from = self.world.slot(robot).position;
        let (to, q) = self.graph.traverse(from, p);
        let slot = self.world.slot_mut(robot);
        slot.position = to;
        slot.entry_port = Port::new(q);
        slot.arrival_index = arrival_index;
        slot.moves += 1;
        to
    }

    fn check_backtrack_target(&self, robot: Label) -> Result<(), EngineError> {
        let slot = self.world.slot(robot);
        if slot.state.mode() == Mode::Backtrack && self.world.docked[slot.position].is_none() {
            return Err(self.violation(robot, slot.position, Violation::BacktrackTargetFree));
        }
        Ok(())
    }

    fn finish(self) -> RunOutcome {
        let sync = self.config.algorithm.is_sync();
        let robots = self
            .world
            .real_robots()
            .iter()
            .enumerate()
            .map(|(i, r)| RobotStats {
                label: i as Label + 1,
                start: r.start,
                final_node: r.position,
                moves: r.moves,
                iterations: r.iterations,
                settle_time: r.settle_time,
                peak_memory_bits: r.peak_memory_bits,
                peak_stack_depth: r.state.stack_depth().map(|_| r.peak_stack_depth),
            })
            .collect();
        let report = RunReport {
            algorithm: self.config.algorithm,
            n: self.graph.node_count(),
            m: self.graph.edge_count(),
            k: self.world.k,
            max_degree: self.max_degree,
            seed: None,
            dispersed: crate::analysis::check_dispersion(&self.world),
            rounds_elapsed: sync.then_some(self.elapsed),
            events_elapsed: (!sync).then_some(self.event_no),
            loop_bound: loop_bound(self.graph),
            robots,
            mutex_arbitrations: self.arbitrations,
            mutex_contentions: self.contentions,
        };
        RunOutcome {
            report,
            world: self.world,
        }
    }
}

impl<S> Step<S> {
    fn map<T>(self, f: impl FnOnce(S) -> T) -> Step<T> {
        Step {
            state: f(self.state),
            action: self.action,
            help: self.help,
        }
    }
}
