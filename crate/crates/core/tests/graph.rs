use std::collections::VecDeque;

use dispersion_core::graph::{parse_graph, random_connected, write_graph};
use dispersion_core::prelude::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fisher-Yates from the top index down, drawing `j` uniformly from
/// `0..=i`, one generator shared by all nodes in index order.
fn reference_shuffle(n: usize, edges: &[(NodeId, NodeId)], seed: u64) -> Vec<Vec<NodeId>> {
    let mut tables = vec![Vec::new(); n];
    for &(u, v) in edges {
        tables[u].push(v);
        tables[v].push(u);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in &mut tables {
        for i in (1..t.len()).rev() {
            let j = rng.gen_range(0..(i as u32 + 1)) as usize;
            t.swap(i, j);
        }
    }
    tables
}

fn bfs_diameter(n: usize, edges: &[(NodeId, NodeId)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut best = 0;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        best = best.max(*dist.iter().max().unwrap());
    }
    best
}

#[test]
fn seeded_triangle_matches_reference_shuffle() {
    let edges = [(0, 1), (0, 2), (1, 2)];
    let g = build_graph(3, &edges, &PortAssignment::Seeded(7)).unwrap();
    let expected = reference_shuffle(3, &edges, 7);
    assert_eq!(g.port_tables(), expected);
    for (v, table) in expected.iter().enumerate() {
        assert_eq!(g.degree(v), 2);
        for p in 0..2 {
            let (u, q) = g.traverse(v, p);
            assert_eq!(u, table[p as usize]);
            assert_eq!(g.traverse(u, q), (v, p));
        }
    }
}

#[test]
fn seeded_ports_match_reference_on_larger_graphs() {
    for seed in 0..20 {
        let g = random_connected(15, 30, seed).unwrap();
        let edges = g.edges();
        let h = build_graph(15, &edges, &PortAssignment::Seeded(seed * 3 + 1)).unwrap();
        assert_eq!(h.port_tables(), reference_shuffle(15, &edges, seed * 3 + 1));
    }
}

#[test]
fn gnm_diameter_matches_bfs() {
    let g = generate(GraphFamily::Gnm, 12, Some(18), 1).unwrap();
    assert_eq!((g.node_count(), g.edge_count()), (12, 18));
    assert_eq!(g.diameter(), bfs_diameter(12, &g.edges()));
}

#[test]
fn family_diameters_match_bfs() {
    for family in [
        GraphFamily::Line,
        GraphFamily::Ring,
        GraphFamily::Complete,
        GraphFamily::RandomTree,
        GraphFamily::Grid,
    ] {
        for n in [1, 2, 5, 9, 16] {
            if family == GraphFamily::Ring && n < 3 {
                continue;
            }
            let g = generate(family, n, None, n as u64).unwrap();
            assert_eq!(g.diameter(), bfs_diameter(n, &g.edges()), "{family} n={n}");
        }
    }
}

proptest! {
    #[test]
    fn ports_form_an_involution(n in 1usize..=25, extra in 0usize..=30, seed in any::<u64>()) {
        let m = (n - 1 + extra).min(n * (n - 1) / 2);
        let g = random_connected(n, m, seed).unwrap();
        prop_assert_eq!(g.edge_count(), m);
        let mut degree_sum = 0;
        for v in 0..n {
            let d = g.degree(v);
            degree_sum += d as usize;
            let mut targets: Vec<NodeId> = (0..d).map(|p| g.traverse(v, p).0).collect();
            for p in 0..d {
                let (u, q) = g.traverse(v, p);
                prop_assert!(q < g.degree(u));
                prop_assert_eq!(g.traverse(u, q), (v, p));
            }
            targets.sort_unstable();
            targets.dedup();
            prop_assert_eq!(targets.len(), d as usize);
        }
        prop_assert_eq!(degree_sum, 2 * m);
    }

    #[test]
    fn file_format_round_trips(n in 1usize..=20, extra in 0usize..=20, seed in any::<u64>()) {
        let m = (n - 1 + extra).min(n * (n - 1) / 2);
        let g = random_connected(n, m, seed).unwrap();
        prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn generators_are_deterministic(n in 3usize..=30, seed in any::<u64>()) {
        for family in [GraphFamily::RandomTree, GraphFamily::Grid, GraphFamily::Ring] {
            prop_assert_eq!(
                generate(family, n, None, seed).unwrap(),
                generate(family, n, None, seed).unwrap()
            );
        }
    }
}
