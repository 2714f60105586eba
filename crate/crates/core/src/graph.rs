//! Anonymous port-labeled graphs.
//!
//! Every node carries only a local numbering of its incident edges. Node
//! indices exist for simulation bookkeeping; step functions never see them.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simulation-internal node index.
pub type NodeId = usize;

/// Retry budget for the rejection-sampling `gnm` generator.
pub const GNM_MAX_RETRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge ({u}, {v}) names a node outside 0..{n}")]
    NodeOutOfRange { u: NodeId, v: NodeId, n: usize },
    #[error("self-loop at node {node}")]
    SelfLoop { node: NodeId },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: NodeId, v: NodeId },
    #[error("graph is disconnected: node {node} is unreachable from node 0")]
    Disconnected { node: NodeId },
    #[error("malformed port permutation at node {node}: {reason}")]
    BadPermutation { node: NodeId, reason: String },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("no connected sample after {0} attempts")]
    RetriesExhausted(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// How local port numbers are assigned when building a graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PortAssignment {
    /// Ports follow edge-list order at every node.
    Canonical,
    /// Start from the canonical order, then shuffle each node's table
    /// independently. Nodes are processed in index order with one
    /// `ChaCha8Rng` seeded from the value; each table gets a Fisher-Yates
    /// pass (`i` from `len-1` down to `1`, swap with `j` drawn uniformly
    /// from `0..=i`).
    Seeded(u64),
    /// For each node, the neighbor reached through port `p` is entry `p`.
    Explicit(Vec<Vec<NodeId>>),
}

/// A connected simple undirected graph whose edges are identified at each
/// endpoint by a local port number in `0..degree`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortLabeledGraph {
    /// `ports[v][p] = (u, q)`: leaving `v` through `p` enters `u` through `q`.
    ports: Vec<Vec<(NodeId, u32)>>,
    edge_count: usize,
}

impl PortLabeledGraph {
    pub fn node_count(&self) -> usize {
        self.ports.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: NodeId) -> u32 {
        self.ports[v].len() as u32
    }

    /// Largest node degree, Δ.
    pub fn max_degree(&self) -> u32 {
        self.ports.iter().map(|t| t.len() as u32).max().unwrap_or(0)
    }

    /// Follows port `p` out of `v`, returning the neighbor and the port by
    /// which the mover enters it.
    ///
    /// Panics if `p` is not a port of `v`.
    pub fn traverse(&self, v: NodeId, p: u32) -> (NodeId, u32) {
        let table = &self.ports[v];
        assert!(
            (p as usize) < table.len(),
            "port {p} out of range at node {v} (degree {})",
            table.len()
        );
        table[p as usize]
    }

    /// Neighbors of `v` in port order.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.ports[v].iter().map(|&(u, _)| u)
    }

    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (v, table) in self.ports.iter().enumerate() {
            for &(u, _) in table {
                if v < u {
                    out.push((v, u));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Per-node neighbor lists in port order; feeds `PortAssignment::Explicit`.
    pub fn port_tables(&self) -> Vec<Vec<NodeId>> {
        (0..self.node_count())
            .map(|v| self.neighbors(v).collect())
            .collect()
    }

    /// Renames node `v` to `perm[v]`, keeping every port number.
    pub fn relabeled(&self, perm: &[NodeId]) -> PortLabeledGraph {
        assert_eq!(perm.len(), self.node_count());
        let mut ports = vec![Vec::new(); self.node_count()];
        for (v, table) in self.ports.iter().enumerate() {
            ports[perm[v]] = table.iter().map(|&(u, q)| (perm[u], q)).collect();
        }
        PortLabeledGraph {
            ports,
            edge_count: self.edge_count,
        }
    }

    /// Exact diameter by breadth-first search from every node.
    pub fn diameter(&self) -> usize {
        (0..self.node_count())
            .map(|s| bfs_distances(self, s).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Checks every structural invariant. Construction already guarantees
    /// them; this is for audits and deserialized values.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.ports.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut degree_sum = 0;
        for (v, table) in self.ports.iter().enumerate() {
            degree_sum += table.len();
            let mut seen = BTreeSet::new();
            for (p, &(u, q)) in table.iter().enumerate() {
                if u >= self.node_count() {
                    return Err(GraphError::NodeOutOfRange {
                        u: v,
                        v: u,
                        n: self.node_count(),
                    });
                }
                if u == v {
                    return Err(GraphError::SelfLoop { node: v });
                }
                if !seen.insert(u) {
                    return Err(GraphError::DuplicateEdge { u: v, v: u });
                }
                let back = self.ports[u].get(q as usize);
                if back != Some(&(v, p as u32)) {
                    return Err(GraphError::BadPermutation {
                        node: v,
                        reason: format!("port {p} -> ({u}, {q}) is not mirrored"),
                    });
                }
            }
        }
        if degree_sum != 2 * self.edge_count {
            return Err(GraphError::Infeasible(format!(
                "degree sum {degree_sum} != 2m = {}",
                2 * self.edge_count
            )));
        }
        check_connected(self.node_count(), |v| self.neighbors(v).collect())
    }
}

fn bfs_distances(g: &PortLabeledGraph, source: NodeId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.node_count()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for u in g.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

fn check_connected(n: usize, neighbors: impl Fn(NodeId) -> Vec<NodeId>) -> Result<(), GraphError> {
    let mut reached = vec![false; n];
    reached[0] = true;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for u in neighbors(v) {
            if !reached[u] {
                reached[u] = true;
                stack.push(u);
            }
        }
    }
    match reached.iter().position(|r| !r) {
        Some(node) => Err(GraphError::Disconnected { node }),
        None => Ok(()),
    }
}

/// Builds a validated graph on nodes `0..n` from an undirected edge list.
pub fn build_graph(
    n: usize,
    edges: &[(NodeId, NodeId)],
    assignment: &PortAssignment,
) -> Result<PortLabeledGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let mut seen = BTreeSet::new();
    let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(GraphError::NodeOutOfRange { u, v, n });
        }
        if u == v {
            return Err(GraphError::SelfLoop { node: u });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(GraphError::DuplicateEdge { u, v });
        }
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    check_connected(n, |v| adjacency[v].clone())?;

    let tables = match assignment {
        PortAssignment::Canonical => adjacency,
        PortAssignment::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for table in adjacency.iter_mut() {
                table.shuffle(&mut rng);
            }
            adjacency
        }
        PortAssignment::Explicit(tables) => {
            if tables.len() != n {
                return Err(GraphError::BadPermutation {
                    node: tables.len().min(n),
                    reason: format!("expected {n} port tables, got {}", tables.len()),
                });
            }
            for (v, (given, expected)) in tables.iter().zip(&adjacency).enumerate() {
                let mut a = given.clone();
                let mut b = expected.clone();
                a.sort_unstable();
                b.sort_unstable();
                if a != b {
                    return Err(GraphError::BadPermutation {
                        node: v,
                        reason: format!("ports {given:?} are not a permutation of neighbors {b:?}"),
                    });
                }
            }
            tables.clone()
        }
    };

    let ports = tables
        .iter()
        .enumerate()
        .map(|(v, table)| {
            table
                .iter()
                .map(|&u| {
                    let q = tables[u]
                        .iter()
                        .position(|&w| w == v)
                        .expect("symmetric adjacency");
                    (u, q as u32)
                })
                .collect()
        })
        .collect();
    Ok(PortLabeledGraph {
        ports,
        edge_count: edges.len(),
    })
}

/// Generator families available to experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFamily {
    Line,
    Ring,
    Complete,
    RandomTree,
    Grid,
    Gnm,
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFamily::Line => "line",
            GraphFamily::Ring => "ring",
            GraphFamily::Complete => "complete",
            GraphFamily::RandomTree => "tree",
            GraphFamily::Grid => "grid",
            GraphFamily::Gnm => "gnm",
        })
    }
}

impl FromStr for GraphFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "line" => GraphFamily::Line,
            "ring" => GraphFamily::Ring,
            "complete" => GraphFamily::Complete,
            "tree" | "random_tree" | "random-tree" => GraphFamily::RandomTree,
            "grid" => GraphFamily::Grid,
            "gnm" => GraphFamily::Gnm,
            other => return Err(format!("unknown graph family `{other}`")),
        })
    }
}

/// Generates a connected graph of the given family.
///
/// Ports are canonical for deterministic families and seeded-random for
/// `RandomTree` and `Gnm`; the result is a pure function of the arguments.
/// `m` is read only by `Gnm`.
pub fn generate(
    family: GraphFamily,
    n: usize,
    m: Option<usize>,
    seed: u64,
) -> Result<PortLabeledGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(NodeId, NodeId)> = match family {
        GraphFamily::Line => (1..n).map(|v| (v - 1, v)).collect(),
        GraphFamily::Ring => {
            if n < 3 {
                return Err(GraphError::Infeasible(format!(
                    "ring needs n >= 3, got {n}"
                )));
            }
            (0..n).map(|v| (v, (v + 1) % n)).collect()
        }
        GraphFamily::Complete => (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect(),
        GraphFamily::RandomTree => random_tree_edges(n, &mut rng),
        GraphFamily::Grid => {
            let width = (1..=n).find(|w| w * w >= n).unwrap_or(1);
            let mut edges = Vec::new();
            for v in 0..n {
                if v % width + 1 < width && v + 1 < n {
                    edges.push((v, v + 1));
                }
                if v + width < n {
                    edges.push((v, v + width));
                }
            }
            edges
        }
        GraphFamily::Gnm => {
            let m = m.ok_or_else(|| GraphError::Infeasible("gnm requires m".into()))?;
            return gnm(n, m, &mut rng);
        }
    };
    let assignment = match family {
        GraphFamily::RandomTree => PortAssignment::Seeded(rng.gen()),
        _ => PortAssignment::Canonical,
    };
    build_graph(n, &edges, &assignment)
}

fn max_edges(n: usize) -> usize {
    n * (n - 1) / 2
}

fn random_tree_edges(n: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(rng);
    (1..n)
        .map(|i| (order[rng.gen_range(0..i)], order[i]))
        .collect()
}

fn pair_from_index(n: usize, mut idx: usize) -> (NodeId, NodeId) {
    for u in 0..n {
        let row = n - 1 - u;
        if idx < row {
            return (u, u + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("pair index out of range")
}

fn gnm(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<PortLabeledGraph, GraphError> {
    if m + 1 < n || m > max_edges(n) {
        return Err(GraphError::Infeasible(format!(
            "gnm needs n-1 <= m <= n(n-1)/2, got n={n}, m={m}"
        )));
    }
    for _ in 0..GNM_MAX_RETRIES {
        let edges: Vec<_> = rand::seq::index::sample(rng, max_edges(n), m)
            .into_iter()
            .map(|i| pair_from_index(n, i))
            .collect();
        match build_graph(n, &edges, &PortAssignment::Seeded(rng.gen())) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GraphError::RetriesExhausted(GNM_MAX_RETRIES))
}

/// Random connected graph with exactly `m` edges: a random spanning tree plus
/// `m - (n - 1)` distinct extra edges, with seeded-random ports. Unlike
/// `gnm` this never needs rejection, so it works for sparse `m`.
pub fn random_connected(n: usize, m: usize, seed: u64) -> Result<PortLabeledGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if m + 1 < n || m > max_edges(n) {
        return Err(GraphError::Infeasible(format!(
            "need n-1 <= m <= n(n-1)/2, got n={n}, m={m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = random_tree_edges(n, &mut rng);
    let present: BTreeSet<_> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let mut spare: Vec<_> = (0..max_edges(n))
        .map(|i| pair_from_index(n, i))
        .filter(|e| !present.contains(e))
        .collect();
    spare.shuffle(&mut rng);
    edges.extend(spare.into_iter().take(m + 1 - n));
    build_graph(n, &edges, &PortAssignment::Seeded(rng.gen()))
}

/// Starting node of each robot; entry `i` belongs to the robot labeled `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialPlacement {
    pub robot_positions: Vec<NodeId>,
}

impl InitialPlacement {
    pub fn new(robot_positions: Vec<NodeId>) -> Self {
        Self { robot_positions }
    }

    pub fn colocated(k: usize, node: NodeId) -> Self {
        Self::new(vec![node; k])
    }

    /// Independent uniform start nodes (sharing allowed).
    pub fn random(k: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..k).map(|_| rng.gen_range(0..n)).collect())
    }

    /// Pairwise distinct uniform start nodes; requires `k <= n`.
    pub fn distinct(k: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(rand::seq::index::sample(&mut rng, n, k).into_vec())
    }

    pub fn robot_count(&self) -> usize {
        self.robot_positions.len()
    }

    pub fn validate(&self, g: &PortLabeledGraph) -> Result<(), PlacementError> {
        let k = self.robot_count();
        if k == 0 {
            return Err(PlacementError::NoRobots);
        }
        if k > g.node_count() {
            return Err(PlacementError::TooManyRobots {
                k,
                n: g.node_count(),
            });
        }
        if let Some((i, &v)) = self
            .robot_positions
            .iter()
            .enumerate()
            .find(|(_, &v)| v >= g.node_count())
        {
            return Err(PlacementError::BadNode {
                robot: i + 1,
                node: v,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlacementError {
    #[error("placement has no robots")]
    NoRobots,
    #[error("k = {k} robots exceeds n = {n} nodes")]
    TooManyRobots { k: usize, n: usize },
    #[error("robot {robot} starts at node {node}, which does not exist")]
    BadNode { robot: usize, node: NodeId },
}

/// Writes the plain-text graph format: `n m`, then `u v` per edge, then
/// one `v: p->u` line per port.
pub fn write_graph(g: &PortLabeledGraph) -> String {
    let mut out = format!("{} {}\n", g.node_count(), g.edge_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    for v in 0..g.node_count() {
        for (p, u) in g.neighbors(v).enumerate() {
            out.push_str(&format!("{v}: {p}->{u}\n"));
        }
    }
    out
}

/// Parses the plain-text graph format. Without a port block the assignment
/// is canonical. A port line may carry several `p->u` mappings.
pub fn parse_graph(text: &str) -> Result<PortLabeledGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let parse_err = |line: usize, msg: String| GraphError::Parse { line, msg };
    let num = |line: usize, tok: &str| -> Result<usize, GraphError> {
        tok.parse().map_err(|_| {
            parse_err(
                line,
                format!("expected a non-negative integer, got `{tok}`"),
            )
        })
    };

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `n m` header".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(parse_err(line_no, "header must be `n m`".into()));
    }
    let n = num(line_no, head[0])?;
    let m = num(line_no, head[1])?;

    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (line_no, l) = lines
            .next()
            .ok_or_else(|| parse_err(line_no, format!("expected {m} edge lines")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 || l.contains(':') {
            return Err(parse_err(line_no, "edge line must be `u v`".into()));
        }
        edges.push((num(line_no, toks[0])?, num(line_no, toks[1])?));
    }

    let mut tables: Vec<Vec<Option<NodeId>>> = vec![Vec::new(); n];
    let mut any_ports = false;
    for (line_no, l) in lines {
        let (node, rest) = l
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, "port line must be `node: p->neighbor`".into()))?;
        let v = num(line_no, node.trim())?;
        if v >= n {
            return Err(parse_err(line_no, format!("node {v} out of range")));
        }
        for mapping in rest.split_whitespace() {
            let (p, u) = mapping
                .split_once("->")
                .ok_or_else(|| parse_err(line_no, format!("bad port mapping `{mapping}`")))?;
            let (p, u) = (num(line_no, p)?, num(line_no, u)?);
            let table = &mut tables[v];
            if table.len() <= p {
                table.resize(p + 1, None);
            }
            if table[p].replace(u).is_some() {
                return Err(parse_err(
                    line_no,
                    format!("port {p} at node {v} given twice"),
                ));
            }
            any_ports = true;
        }
    }

    let assignment = if any_ports {
        let mut explicit = Vec::with_capacity(n);
        for (v, table) in tables.into_iter().enumerate() {
            let full: Option<Vec<NodeId>> = table.into_iter().collect();
            explicit.push(full.ok_or_else(|| GraphError::BadPermutation {
                node: v,
                reason: "gap in port numbers".into(),
            })?);
        }
        PortAssignment::Explicit(explicit)
    } else {
        PortAssignment::Canonical
    };
    build_graph(n, &edges, &assignment)
}
