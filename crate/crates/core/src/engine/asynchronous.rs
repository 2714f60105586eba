use super::{
    default_fairness_bound, loop_bound, AlgorithmKind, EngineError, MutexPolicy, RunConfig,
    RunOutcome, Scheduler, SchedulerPolicy, Simulation,
};
use crate::agents::{Label, Mode};
use crate::graph::{InitialPlacement, PortLabeledGraph};
use crate::trace::TraceSink;

/// Discrete-event execution: one scheduled robot runs one full iteration
/// per event, until every robot has settled or the safety cap
/// `C·k·(4m-2(n-1)+1)` events is reached.
pub fn run_async(
    graph: &PortLabeledGraph,
    placement: &InitialPlacement,
    algorithm: AlgorithmKind,
    scheduler: SchedulerPolicy,
    mutex: MutexPolicy,
    sink: &mut dyn TraceSink,
) -> Result<RunOutcome, EngineError> {
    let config = RunConfig::new(algorithm)
        .with_mutex(mutex)
        .with_scheduler(scheduler);
    let mut sim = Simulation::new(graph, placement, &config, sink)?;
    drive(&mut sim)?;
    Ok(sim.finish())
}

pub(super) fn drive(sim: &mut Simulation<'_>) -> Result<(), EngineError> {
    if sim.config.algorithm.is_sync() {
        return Err(EngineError::WrongEngine {
            algorithm: sim.config.algorithm,
            engine: "asynchronous",
        });
    }
    let k = sim.k();
    let cap = sim.config.safety_factor * k as u64 * (loop_bound(sim.graph) + 1);
    let fairness = sim
        .config
        .fairness_bound
        .unwrap_or_else(|| default_fairness_bound(k));
    let mut scheduler = Scheduler::new(&sim.config.scheduler, k, fairness);

    let mut decision = 0u64;
    while sim.event_no < cap {
        let eligible: Vec<bool> = sim
            .world
            .real_robots()
            .iter()
            .map(|r| r.state.mode() != Mode::Settled)
            .collect();
        if !eligible.contains(&true) {
            break;
        }
        let actor = scheduler.pick(&eligible);
        let node = sim.world.slot(actor).position;

        let mut mutex = None;
        if sim.world.docked[node].is_none() {
            let contenders: Vec<Label> = (1..=k as Label)
                .filter(|&l| {
                    let s = sim.world.slot(l);
                    s.position == node && s.state.mode() != Mode::Settled
                })
                .collect();
            let record = sim.arbitrate(node, &contenders)?;
            if !sim.config.ghost_docking && record.winner != actor {
                // A robot parked here won; it docks in its own iteration
                // before the actor continues as a loser.
                sim.elapsed = sim.event_no;
                let pending = sim.compute(record.winner, Some(record.clone()))?;
                sim.commit(pending, None, Some(decision))?;
                scheduler.activated(record.winner);
            }
            mutex = Some(record);
        }

        sim.elapsed = sim.event_no;
        let pending = sim.compute(actor, mutex)?;
        if let Some(port) = sim.commit(pending, None, Some(decision))? {
            let stamp = sim.event_no;
            sim.move_robot(actor, port, stamp);
            sim.check_backtrack_target(actor)?;
        }
        decision += 1;
    }
    sim.elapsed = sim.event_no;
    Ok(())
}
