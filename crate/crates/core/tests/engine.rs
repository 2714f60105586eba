mod common;

use dispersion_core::analysis::check_stack_bound;
use dispersion_core::engine::{default_fairness_bound, loop_bound, EngineError};
use dispersion_core::graph::random_connected;
use dispersion_core::prelude::*;
use dispersion_core::trace::{replay, to_json_lines, ReplayStatus, TraceHeader};
use proptest::prelude::*;

use common::{compact, line, traced};

#[test]
fn robots_on_distinct_nodes_never_move() {
    let g = random_connected(10, 15, 2).unwrap();
    let p = InitialPlacement::distinct(6, 10, 9);
    for alg in AlgorithmKind::ALL {
        let (out, events) = traced(&g, &p, &RunConfig::new(alg));
        assert!(out.report.dispersed);
        assert_eq!(out.report.max_moves(), 0, "{alg}");
        assert!(events.iter().all(|e| e.action == Action::Dock));
        if alg.is_sync() {
            assert!(events.iter().all(|e| e.round == Some(0)));
        }
    }
}

#[test]
fn line_of_five_needs_four_hops() {
    let out = run_sync(
        &line(5),
        &InitialPlacement::colocated(5, 0),
        AlgorithmKind::HelpingSync,
        MutexPolicy::LowestLabel,
        &mut NullSink,
    )
    .unwrap();
    assert!(out.report.dispersed);
    assert!(out.report.max_moves() >= 4);
}

#[test]
fn single_robot_settles_in_one_event() {
    let g = random_connected(7, 12, 5).unwrap();
    let p = InitialPlacement::new(vec![4]);
    for sched in [
        SchedulerPolicy::RoundRobin,
        SchedulerPolicy::SeededRandom { seed: 3 },
        SchedulerPolicy::adversarial_from_seed(1, 3),
    ] {
        for alg in [AlgorithmKind::HelpingAsync, AlgorithmKind::IndependentAsync] {
            let config = RunConfig::new(alg).with_scheduler(sched.clone());
            let (out, events) = traced(&g, &p, &config);
            assert_eq!(events.len(), 1);
            assert_eq!(out.report.events_elapsed, Some(1));
            assert_eq!(out.report.max_moves(), 0);
        }
    }
}

#[test]
fn ring_iterations_within_bound() {
    let g = generate(GraphFamily::Ring, 6, None, 0).unwrap();
    let p = InitialPlacement::random(4, 6, 11);
    let out = run_async(
        &g,
        &p,
        AlgorithmKind::IndependentAsync,
        SchedulerPolicy::RoundRobin,
        MutexPolicy::LowestLabel,
        &mut NullSink,
    )
    .unwrap();
    assert!(out.report.dispersed);
    assert_eq!(loop_bound(&g) + 1, 15);
    assert!(out.report.robots.iter().all(|r| r.iterations <= 15));

    let sync = run_sync(
        &g,
        &p,
        AlgorithmKind::IndependentSync,
        MutexPolicy::LowestLabel,
        &mut NullSink,
    )
    .unwrap();
    assert!(sync
        .report
        .robots
        .iter()
        .all(|r| r.settle_time.unwrap() <= 14));
}

#[test]
fn seeded_random_scheduler_is_reproducible() {
    let g = random_connected(14, 25, 6).unwrap();
    let p = InitialPlacement::colocated(9, 2);
    for alg in [AlgorithmKind::HelpingAsync, AlgorithmKind::IndependentAsync] {
        let config = RunConfig::new(alg).with_scheduler(SchedulerPolicy::SeededRandom { seed: 77 });
        let text = || {
            let (_, events) = traced(&g, &p, &config);
            to_json_lines(&TraceHeader::new(&g, &p, &config, Some(77)), &events)
        };
        assert_eq!(text(), text());
    }
}

#[test]
fn parked_winner_docks_before_the_actor_continues() {
    // Robot 2 is scheduled first but robot 1, parked at the same node, wins.
    let g = line(2);
    let p = InitialPlacement::colocated(2, 0);
    let config = RunConfig::new(AlgorithmKind::HelpingAsync).with_scheduler(
        SchedulerPolicy::AdversarialStalling {
            weights: vec![100, 1],
        },
    );
    let (out, events) = traced(&g, &p, &config);
    let got: Vec<String> = events.iter().map(compact).collect();
    assert_eq!(
        got,
        vec![
            "r1@0 ES dock mutex 1,2->1",
            "r2@0 EE move0 mutex 1,2->1 help 1<-2:-1",
            "r2@1 ES dock mutex 2->2",
        ]
    );
    assert_eq!(events[0].decision, events[1].decision);
    assert!(out.report.dispersed);
}

/// Every unsettled robot acts at least once in any `B + 1` consecutive
/// scheduling decisions.
fn audit_fairness(events: &[TraceEvent], k: usize, bound: u64) {
    for robot in 1..=k as Label {
        let mut last: Option<u64> = None;
        for e in events.iter().filter(|e| e.robot == robot) {
            let d = e.decision.expect("async events carry decisions");
            let passed = match last {
                Some(prev) => d.saturating_sub(prev + 1),
                None => d,
            };
            assert!(passed <= bound, "robot {robot} passed over {passed} times");
            last = Some(d);
        }
    }
}

#[test]
fn fairness_is_auditable_from_traces() {
    for seed in 0..30 {
        let g = random_connected(18, 30, seed).unwrap();
        let k = 12;
        let p = InitialPlacement::colocated(k, (seed % 18) as usize);
        for bound in [None, Some(k as u64), Some(k as u64 + 3)] {
            let mut config = RunConfig::new(AlgorithmKind::IndependentAsync)
                .with_scheduler(SchedulerPolicy::adversarial_from_seed(k, seed));
            config.fairness_bound = bound;
            let (out, events) = traced(&g, &p, &config);
            assert!(out.report.dispersed);
            audit_fairness(&events, k, bound.unwrap_or(default_fairness_bound(k)));
        }
    }
}

#[test]
fn node_names_do_not_matter() {
    let g = random_connected(12, 20, 31).unwrap();
    let perm: Vec<NodeId> = (0..12).map(|v| (v * 5 + 3) % 12).collect();
    let h = g.relabeled(&perm);
    let p = InitialPlacement::random(8, 12, 4);
    let q = InitialPlacement::new(p.robot_positions.iter().map(|&v| perm[v]).collect());
    for alg in AlgorithmKind::ALL {
        let (a, ea) = traced(&g, &p, &RunConfig::new(alg));
        let (b, eb) = traced(&h, &q, &RunConfig::new(alg));
        assert_eq!(ea.len(), eb.len());
        for (x, y) in ea.iter().zip(&eb) {
            assert_eq!(
                (x.robot, x.action, perm[x.node]),
                (y.robot, y.action, y.node)
            );
        }
        for (r, s) in a.world.real_robots().iter().zip(b.world.real_robots()) {
            assert_eq!(perm[r.position], s.position);
        }
    }
}

#[test]
fn tampered_trace_reports_first_divergence() {
    let g = random_connected(10, 14, 8).unwrap();
    let p = InitialPlacement::colocated(6, 0);
    let config = RunConfig::new(AlgorithmKind::HelpingSync);
    let (_, events) = traced(&g, &p, &config);
    let text = to_json_lines(&TraceHeader::new(&g, &p, &config, None), &events);
    assert_eq!(
        replay(&text).unwrap(),
        ReplayStatus::Identical {
            events: events.len()
        }
    );

    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    lines[4] = lines[4].replacen("\"robot\":", "\"robot\":9", 1);
    let tampered = lines.join("\n") + "\n";
    match replay(&tampered) {
        Ok(ReplayStatus::Diverged { index, .. }) => assert_eq!(index, 3),
        other => panic!("expected divergence, got {other:?}"),
    }

    let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
    match replay(&truncated).unwrap() {
        ReplayStatus::Diverged {
            index, recorded, ..
        } => {
            assert_eq!(index, 2);
            assert!(recorded.is_none());
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn wrong_engine_and_bad_placement_are_rejected() {
    let g = line(3);
    let err = run_sync(
        &g,
        &InitialPlacement::colocated(2, 0),
        AlgorithmKind::HelpingAsync,
        MutexPolicy::LowestLabel,
        &mut NullSink,
    )
    .unwrap_err();
    assert!(matches!(err, EngineError::WrongEngine { .. }));
    let err = run(
        &g,
        &InitialPlacement::colocated(4, 0),
        &RunConfig::new(AlgorithmKind::IndependentSync),
        &mut NullSink,
    )
    .unwrap_err();
    assert!(matches!(err, EngineError::Placement(_)));
}

#[test]
fn tiny_safety_cap_reports_non_dispersal() {
    let g = line(6);
    let mut config = RunConfig::new(AlgorithmKind::IndependentAsync);
    config.safety_factor = 0;
    let out = run(
        &g,
        &InitialPlacement::colocated(6, 0),
        &config,
        &mut NullSink,
    )
    .unwrap();
    assert!(!out.report.dispersed);
}

fn any_instance() -> impl Strategy<Value = (PortLabeledGraph, InitialPlacement)> {
    (1usize..=16)
        .prop_flat_map(|n| {
            let hi = (2 * n).min(n * (n - 1) / 2).max(n - 1);
            (Just(n), n - 1..=hi, 1..=n, any::<u64>())
        })
        .prop_map(|(n, m, k, seed)| {
            let g = random_connected(n, m, seed).unwrap();
            let p = InitialPlacement::random(k, n, seed ^ 0x5a5a);
            (g, p)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn every_algorithm_disperses((g, p) in any_instance(), sched_seed in any::<u64>()) {
        let k = p.robot_count();
        for alg in AlgorithmKind::ALL {
            let config = RunConfig::new(alg)
                .with_mutex(MutexPolicy::EarliestArrival)
                .with_scheduler(SchedulerPolicy::adversarial_from_seed(k, sched_seed));
            let (out, _) = traced(&g, &p, &config);
            prop_assert!(out.report.dispersed);
            prop_assert!(check_dispersion(&out.world));
            prop_assert!(check_time_bound(&out.report));
            prop_assert!(check_memory_bound(&out.report, k, g.max_degree(), g.edge_count()));
            prop_assert!(check_stack_bound(&out.report));
        }
    }

    #[test]
    fn at_most_one_dock_per_node_at_every_event((g, p) in any_instance()) {
        for alg in AlgorithmKind::ALL {
            let (_, events) = traced(&g, &p, &RunConfig::new(alg));
            let mut docked = vec![false; g.node_count()];
            for e in &events {
                if e.action == Action::Dock {
                    prop_assert!(!docked[e.node]);
                    docked[e.node] = true;
                }
                prop_assert!(e.mode_before != Mode::Settled);
            }
            prop_assert_eq!(docked.iter().filter(|&&d| d).count(), p.robot_count());
        }
    }
}
