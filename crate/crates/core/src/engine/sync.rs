use std::collections::BTreeMap;

use super::{
    loop_bound, AlgorithmKind, EngineError, MutexPolicy, RunConfig, RunOutcome, Simulation,
};
use crate::agents::{Label, Port};
use crate::algorithms::HelpEffect;
use crate::graph::{InitialPlacement, NodeId, PortLabeledGraph};
use crate::trace::{MutexRecord, TraceSink};

/// Synchronous rounds `0..=4m-2(n-1)`. Every robot's iteration in a round
/// is computed from the world as it stood when the round began.
pub fn run_sync(
    graph: &PortLabeledGraph,
    placement: &InitialPlacement,
    algorithm: AlgorithmKind,
    mutex: MutexPolicy,
    sink: &mut dyn TraceSink,
) -> Result<RunOutcome, EngineError> {
    let config = RunConfig::new(algorithm).with_mutex(mutex);
    let mut sim = Simulation::new(graph, placement, &config, sink)?;
    drive(&mut sim)?;
    Ok(sim.finish())
}

pub(super) fn drive(sim: &mut Simulation<'_>) -> Result<(), EngineError> {
    if !sim.config.algorithm.is_sync() {
        return Err(EngineError::WrongEngine {
            algorithm: sim.config.algorithm,
            engine: "synchronous",
        });
    }
    for round in 0..=loop_bound(sim.graph) {
        let groups = sim.world.unsettled_by_node();
        if groups.is_empty() {
            break;
        }
        sim.elapsed = round;

        let mut outcomes: BTreeMap<NodeId, MutexRecord> = BTreeMap::new();
        for (&node, labels) in &groups {
            if sim.world.docked[node].is_some() {
                continue;
            }
            let record = sim.arbitrate(node, labels)?;
            if sim.config.ghost_docking {
                // The phantom winner records everyone present, as a real
                // synchronous winner would.
                for &c in labels {
                    let port = sim.world.slot(c).entry_port;
                    sim.apply_help(&HelpEffect {
                        host: record.winner,
                        visitor: c,
                        port,
                    });
                }
            }
            outcomes.insert(node, record);
        }

        let mut pending = Vec::new();
        for labels in groups.values() {
            for &robot in labels {
                let node = sim.world.slot(robot).position;
                pending.push(sim.compute(robot, outcomes.get(&node).cloned())?);
            }
        }
        pending.sort_by_key(|p| p.robot);

        let mut moves = Vec::new();
        for p in pending {
            let (robot, node) = (p.robot, p.node);
            if let Some(port) = sim.commit(p, Some(round), None)? {
                moves.push((robot, node, port));
            }
        }
        for arrival in apply_moves_single_lane(sim.graph, &moves) {
            let (_, port) = moves
                .iter()
                .find(|m| m.0 == arrival.robot)
                .map(|m| (m.1, m.2))
                .expect("arrival matches a move");
            sim.move_robot(arrival.robot, port, arrival.arrival_index);
        }
        for &(robot, _, _) in &moves {
            sim.check_backtrack_target(robot)?;
        }
        sim.elapsed = round + 1;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arrival {
    pub robot: Label,
    pub node: NodeId,
    pub entry_port: Port,
    /// Order of entry at `node` within this round, from 0.
    pub arrival_index: u64,
}

/// Orders one round's moves `(robot, from, exit port)` at their
/// destinations. Robots sharing an edge and direction enter in label order;
/// at each node arrivals are ranked by entry port, then by that order.
pub fn apply_moves_single_lane(
    graph: &PortLabeledGraph,
    moves: &[(Label, NodeId, u32)],
) -> Vec<Arrival> {
    let mut by_node: BTreeMap<NodeId, Vec<(u32, Label)>> = BTreeMap::new();
    for &(robot, from, p) in moves {
        let (to, q) = graph.traverse(from, p);
        by_node.entry(to).or_default().push((q, robot));
    }
    let mut out = Vec::with_capacity(moves.len());
    for (node, mut entrants) in by_node {
        entrants.sort_unstable();
        out.extend(
            entrants
                .into_iter()
                .enumerate()
                .map(|(i, (q, robot))| Arrival {
                    robot,
                    node,
                    entry_port: Port::new(q),
                    arrival_index: i as u64,
                }),
        );
    }
    out
}
