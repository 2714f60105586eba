//! Traces worked out by hand, line by line through each algorithm's
//! pseudocode, independently of the engine.

use dispersion_core::prelude::*;

use super::{line, triangle};

pub struct Reference {
    pub name: &'static str,
    pub graph: PortLabeledGraph,
    pub placement: InitialPlacement,
    pub config: RunConfig,
    pub expected: Vec<&'static str>,
}

/// Star centred at node 1 with leaves 0, 2, 3; the last robot has to
/// back out of leaf 2 before finding leaf 3.
pub fn star() -> PortLabeledGraph {
    build_graph(4, &[(0, 1), (1, 2), (1, 3)], &PortAssignment::Canonical).unwrap()
}

pub fn all() -> Vec<Reference> {
    let tri = InitialPlacement::colocated(3, 0);
    let four = InitialPlacement::colocated(4, 0);
    let cfg = RunConfig::new;
    vec![
        Reference {
            name: "triangle helping-sync",
            graph: triangle(),
            placement: tri.clone(),
            config: cfg(AlgorithmKind::HelpingSync),
            expected: vec![
                "0 r1@0 ES dock mutex 1,2,3->1 help 1<-2:-1 1<-3:-1",
                "0 r2@0 EE move0 mutex 1,2,3->1",
                "0 r3@0 EE move0 mutex 1,2,3->1",
                "1 r2@1 ES dock mutex 2,3->2 help 2<-3:0",
                "1 r3@1 EE move1 mutex 2,3->2",
                "2 r3@2 ES dock mutex 3->3",
            ],
        },
        Reference {
            name: "triangle independent-sync",
            graph: triangle(),
            placement: tri.clone(),
            config: cfg(AlgorithmKind::IndependentSync),
            expected: vec![
                "0 r1@0 ES dock mutex 1,2,3->1",
                "0 r2@0 EE move0 mutex 1,2,3->1",
                "0 r3@0 EE move0 mutex 1,2,3->1",
                "1 r2@1 ES dock mutex 2,3->2",
                "1 r3@1 EE move1 mutex 2,3->2",
                "2 r3@2 ES dock mutex 3->3",
            ],
        },
        Reference {
            name: "triangle helping-async",
            graph: triangle(),
            placement: tri.clone(),
            config: cfg(AlgorithmKind::HelpingAsync),
            expected: vec![
                "r1@0 ES dock mutex 1,2,3->1",
                "r2@0 EE move0 help 1<-2:-1",
                "r3@0 EE move0 help 1<-3:-1",
                "r2@1 ES dock mutex 2,3->2",
                "r3@1 EE move1 help 2<-3:0",
                "r3@2 ES dock mutex 3->3",
            ],
        },
        Reference {
            name: "triangle independent-async",
            graph: triangle(),
            placement: tri,
            config: cfg(AlgorithmKind::IndependentAsync),
            expected: vec![
                "r1@0 ES dock mutex 1,2,3->1",
                "r2@0 EE move0",
                "r3@0 EE move0",
                "r2@1 ES dock mutex 2,3->2",
                "r3@1 EE move1",
                "r3@2 ES dock mutex 3->3",
            ],
        },
        Reference {
            name: "line4 helping-sync",
            graph: line(4),
            placement: four.clone(),
            config: cfg(AlgorithmKind::HelpingSync),
            expected: vec![
                "0 r1@0 ES dock mutex 1,2,3,4->1 help 1<-2:-1 1<-3:-1 1<-4:-1",
                "0 r2@0 EE move0 mutex 1,2,3,4->1",
                "0 r3@0 EE move0 mutex 1,2,3,4->1",
                "0 r4@0 EE move0 mutex 1,2,3,4->1",
                "1 r2@1 ES dock mutex 2,3,4->2 help 2<-3:0 2<-4:0",
                "1 r3@1 EE move1 mutex 2,3,4->2",
                "1 r4@1 EE move1 mutex 2,3,4->2",
                "2 r3@2 ES dock mutex 3,4->3 help 3<-4:0",
                "2 r4@2 EE move1 mutex 3,4->3",
                "3 r4@3 ES dock mutex 4->4",
            ],
        },
        Reference {
            name: "line4 independent-sync",
            graph: line(4),
            placement: four.clone(),
            config: cfg(AlgorithmKind::IndependentSync),
            expected: vec![
                "0 r1@0 ES dock mutex 1,2,3,4->1",
                "0 r2@0 EE move0 mutex 1,2,3,4->1",
                "0 r3@0 EE move0 mutex 1,2,3,4->1",
                "0 r4@0 EE move0 mutex 1,2,3,4->1",
                "1 r2@1 ES dock mutex 2,3,4->2",
                "1 r3@1 EE move1 mutex 2,3,4->2",
                "1 r4@1 EE move1 mutex 2,3,4->2",
                "2 r3@2 ES dock mutex 3,4->3",
                "2 r4@2 EE move1 mutex 3,4->3",
                "3 r4@3 ES dock mutex 4->4",
            ],
        },
        Reference {
            name: "line4 helping-async",
            graph: line(4),
            placement: four.clone(),
            config: cfg(AlgorithmKind::HelpingAsync),
            expected: vec![
                "r1@0 ES dock mutex 1,2,3,4->1",
                "r2@0 EE move0 help 1<-2:-1",
                "r3@0 EE move0 help 1<-3:-1",
                "r4@0 EE move0 help 1<-4:-1",
                "r2@1 ES dock mutex 2,3,4->2",
                "r3@1 EE move1 help 2<-3:0",
                "r4@1 EE move1 help 2<-4:0",
                "r3@2 ES dock mutex 3,4->3",
                "r4@2 EE move1 help 3<-4:0",
                "r4@3 ES dock mutex 4->4",
            ],
        },
        Reference {
            name: "line4 independent-async",
            graph: line(4),
            placement: four.clone(),
            config: cfg(AlgorithmKind::IndependentAsync),
            expected: vec![
                "r1@0 ES dock mutex 1,2,3,4->1",
                "r2@0 EE move0",
                "r3@0 EE move0",
                "r4@0 EE move0",
                "r2@1 ES dock mutex 2,3,4->2",
                "r3@1 EE move1",
                "r4@1 EE move1",
                "r3@2 ES dock mutex 3,4->3",
                "r4@2 EE move1",
                "r4@3 ES dock mutex 4->4",
            ],
        },
        Reference {
            name: "star helping-sync",
            graph: star(),
            placement: four.clone(),
            config: cfg(AlgorithmKind::HelpingSync),
            expected: vec![
                "0 r1@0 ES dock mutex 1,2,3,4->1 help 1<-2:-1 1<-3:-1 1<-4:-1",
                "0 r2@0 EE move0 mutex 1,2,3,4->1",
                "0 r3@0 EE move0 mutex 1,2,3,4->1",
                "0 r4@0 EE move0 mutex 1,2,3,4->1",
                "1 r2@1 ES dock mutex 2,3,4->2 help 2<-3:0 2<-4:0",
                "1 r3@1 EE move1 mutex 2,3,4->2",
                "1 r4@1 EE move1 mutex 2,3,4->2",
                "2 r3@2 ES dock mutex 3,4->3 help 3<-4:0",
                "2 r4@2 EB move0 mutex 3,4->3",
                "3 r4@1 BE move2",
                "4 r4@3 ES dock mutex 4->4",
            ],
        },
        Reference {
            name: "star independent-sync",
            graph: star(),
            placement: four.clone(),
            config: cfg(AlgorithmKind::IndependentSync),
            expected: vec![
                "0 r1@0 ES dock mutex 1,2,3,4->1",
                "0 r2@0 EE move0 mutex 1,2,3,4->1",
                "0 r3@0 EE move0 mutex 1,2,3,4->1",
                "0 r4@0 EE move0 mutex 1,2,3,4->1",
                "1 r2@1 ES dock mutex 2,3,4->2",
                "1 r3@1 EE move1 mutex 2,3,4->2",
                "1 r4@1 EE move1 mutex 2,3,4->2",
                "2 r3@2 ES dock mutex 3,4->3",
                "2 r4@2 EB move0 mutex 3,4->3",
                "3 r4@1 BE move2",
                "4 r4@3 ES dock mutex 4->4",
            ],
        },
        Reference {
            name: "star helping-async",
            graph: star(),
            placement: four.clone(),
            config: cfg(AlgorithmKind::HelpingAsync),
            expected: vec![
                "r1@0 ES dock mutex 1,2,3,4->1",
                "r2@0 EE move0 help 1<-2:-1",
                "r3@0 EE move0 help 1<-3:-1",
                "r4@0 EE move0 help 1<-4:-1",
                "r2@1 ES dock mutex 2,3,4->2",
                "r3@1 EE move1 help 2<-3:0",
                "r4@1 EE move1 help 2<-4:0",
                "r3@2 ES dock mutex 3,4->3",
                "r4@2 EB move0 help 3<-4:0",
                "r4@1 BE move2",
                "r4@3 ES dock mutex 4->4",
            ],
        },
        Reference {
            name: "star independent-async",
            graph: star(),
            placement: four,
            config: cfg(AlgorithmKind::IndependentAsync),
            expected: vec![
                "r1@0 ES dock mutex 1,2,3,4->1",
                "r2@0 EE move0",
                "r3@0 EE move0",
                "r4@0 EE move0",
                "r2@1 ES dock mutex 2,3,4->2",
                "r3@1 EE move1",
                "r4@1 EE move1",
                "r3@2 ES dock mutex 3,4->3",
                "r4@2 EB move0",
                "r4@1 BE move2",
                "r4@3 ES dock mutex 4->4",
            ],
        },
    ]
}
