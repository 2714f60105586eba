#![allow(dead_code)]

use dispersion_core::prelude::*;
use dispersion_core::trace::TraceEvent;

/// Compact one-line rendering of a trace event used by reference traces:
/// `[round ]r<robot>@<node> <before><after> <action>[ mutex <contenders>-><winner>][ help host<-visitor:port ...]`.
pub fn compact(e: &TraceEvent) -> String {
    let mut s = String::new();
    if let Some(r) = e.round {
        s.push_str(&format!("{r} "));
    }
    s.push_str(&format!(
        "r{}@{} {}{} ",
        e.robot,
        e.node,
        e.mode_before.short(),
        e.mode_after.short()
    ));
    s.push_str(&match e.action {
        Action::Move(p) => format!("move{p}"),
        Action::Dock => "dock".into(),
        Action::Stay => "stay".into(),
    });
    if let Some(m) = &e.mutex {
        let c: Vec<String> = m.contenders.iter().map(|l| l.to_string()).collect();
        s.push_str(&format!(" mutex {}->{}", c.join(","), m.winner));
    }
    if !e.help.is_empty() {
        s.push_str(" help");
        for h in &e.help {
            s.push_str(&format!(" {}<-{}:{}", h.host, h.visitor, h.port));
        }
    }
    s
}

pub mod reference;

pub fn triangle() -> PortLabeledGraph {
    build_graph(3, &[(0, 1), (0, 2), (1, 2)], &PortAssignment::Canonical).unwrap()
}

pub fn line(n: usize) -> PortLabeledGraph {
    generate(GraphFamily::Line, n, None, 0).unwrap()
}

pub fn traced(
    graph: &PortLabeledGraph,
    placement: &InitialPlacement,
    config: &RunConfig,
) -> (RunOutcome, Vec<TraceEvent>) {
    let mut events = Vec::new();
    let out = run(graph, placement, config, &mut events).expect("run completes");
    (out, events)
}
