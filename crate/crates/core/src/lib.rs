//! Deterministic simulation of mobile-robot dispersion on anonymous
//! port-labeled graphs.
//!
//! Three depth-first dispersion algorithms are provided: two in which docked
//! robots help visitors with per-visitor records (synchronous and
//! asynchronous), and one in which every robot keeps its own visited array
//! and port stack (usable under either engine).
//!
//! ```
//! use dispersion_core::prelude::*;
//!
//! let graph = generate(GraphFamily::Ring, 6, None, 0).unwrap();
//! let placement = InitialPlacement::colocated(4, 0);
//! let config = RunConfig::new(AlgorithmKind::IndependentAsync);
//! let outcome = run(&graph, &placement, &config, &mut NullSink).unwrap();
//! assert!(outcome.report.dispersed);
//! ```

pub mod agents;
pub mod algorithms;
pub mod analysis;
pub mod engine;
pub mod experiment;
pub mod graph;
pub mod trace;

pub mod prelude {
    pub use crate::agents::{HelpingState, IndependentState, Label, Mode, Port};
    pub use crate::algorithms::Action;
    pub use crate::analysis::{
        check_dispersion, check_memory_bound, check_time_bound, RobotStats, RunReport,
    };
    pub use crate::engine::{
        run, run_async, run_sync, AlgorithmKind, MutexPolicy, RunConfig, RunOutcome,
        SchedulerPolicy,
    };
    pub use crate::graph::{
        build_graph, generate, GraphFamily, InitialPlacement, NodeId, PortAssignment,
        PortLabeledGraph,
    };
    pub use crate::trace::{NullSink, TraceEvent, TraceSink};
}
