//! Robot state for the helping and independent algorithm families, and
//! memory accounting over those states.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Robot label, `1..=k`.
pub type Label = u32;

/// A local port number, or the "no entry yet" sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Port(i32);

impl Port {
    pub const NONE: Port = Port(-1);

    pub fn new(p: u32) -> Self {
        Port(p as i32)
    }

    pub fn is_none(self) -> bool {
        self.0 < 0
    }

    pub fn get(self) -> Option<u32> {
        (self.0 >= 0).then_some(self.0 as u32)
    }

    /// `(self + 1) mod degree`; the sentinel advances to port 0.
    pub fn advance(self, degree: u32) -> Port {
        debug_assert!(degree > 0);
        Port(((self.0 + 1) as u32 % degree) as i32)
    }

    pub fn raw(self) -> i32 {
        self.0
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Explore,
    Backtrack,
    Settled,
}

impl Mode {
    pub fn short(self) -> char {
        match self {
            Mode::Explore => 'E',
            Mode::Backtrack => 'B',
            Mode::Settled => 'S',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotCore {
    pub label: Label,
    pub mode: Mode,
    pub port_entered: Port,
    pub round: u64,
}

impl RobotCore {
    pub fn new(label: Label) -> Self {
        Self {
            label,
            mode: Mode::Explore,
            port_entered: Port::NONE,
            round: 0,
        }
    }
}

/// Arrays a helping robot keeps once docked, indexed by visitor label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DockedArrays {
    visited: Vec<bool>,
    entry_port: Vec<Port>,
}

impl DockedArrays {
    pub fn new(label_space: usize) -> Self {
        Self {
            visited: vec![false; label_space],
            entry_port: vec![Port::NONE; label_space],
        }
    }

    pub fn visited(&self, j: Label) -> bool {
        self.visited[j as usize - 1]
    }

    pub fn entry_port(&self, j: Label) -> Port {
        self.entry_port[j as usize - 1]
    }

    pub fn len(&self) -> usize {
        self.visited.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visited.is_empty()
    }

    /// First-visit bookkeeping: a no-op once `j` has been recorded.
    pub fn record(&mut self, j: Label, port: Port) {
        let i = j as usize - 1;
        if !self.visited[i] {
            self.visited[i] = true;
            self.entry_port[i] = port;
        }
    }
}

/// State for the helping algorithms (synchronous and asynchronous).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelpingState {
    pub core: RobotCore,
    pub parent_ptr: Port,
    pub seen: bool,
    pub docked: Option<DockedArrays>,
    /// Robot count `k` known to every robot; sizes the docked arrays.
    pub label_space: usize,
}

impl HelpingState {
    pub fn new(label: Label, label_space: usize) -> Self {
        Self {
            core: RobotCore::new(label),
            parent_ptr: Port::NONE,
            seen: false,
            docked: None,
            label_space,
        }
    }
}

/// State for the independent algorithm: own visited array and a port stack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependentState {
    pub core: RobotCore,
    visited: Vec<bool>,
    pub stack: Vec<Port>,
}

impl IndependentState {
    pub fn new(label: Label, label_space: usize) -> Self {
        Self {
            core: RobotCore::new(label),
            visited: vec![false; label_space],
            stack: Vec::new(),
        }
    }

    pub fn has_visited(&self, j: Label) -> bool {
        self.visited[j as usize - 1]
    }

    pub fn mark_visited(&mut self, j: Label) {
        self.visited[j as usize - 1] = true;
    }

    pub fn stack_depth(&self) -> usize {
        self.stack.len()
    }
}

/// `⌈log2 x⌉` for `x >= 1`; zero for `x <= 1`.
pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from(64 - (x - 1).leading_zeros())
    }
}

/// Bits to hold a port value or the sentinel: `⌈log2(Δ+1)⌉`.
pub fn port_bits(max_degree: u32) -> u64 {
    ceil_log2(u64::from(max_degree) + 1)
}

/// Width of the iteration counter, sized to hold the loop bound `4m-2(n-1)`.
pub fn round_bits(m: usize) -> u64 {
    ceil_log2(4 * m as u64 + 1)
}

/// Memory of a helping robot: two ports, 2-bit mode, `seen`, the round
/// counter, and once settled the `visited` and `entry_port` arrays.
pub fn memory_bits_helping(state: &HelpingState, k: usize, max_degree: u32, m: usize) -> u64 {
    let pb = port_bits(max_degree);
    let base = 2 * pb + 2 + 1 + round_bits(m);
    if state.core.mode == Mode::Settled {
        base + k as u64 + k as u64 * pb
    } else {
        base
    }
}

/// Memory of an independent robot: one port, 2-bit mode, `visited`, and
/// the current stack contents.
pub fn memory_bits_independent(state: &IndependentState, k: usize, max_degree: u32) -> u64 {
    let pb = port_bits(max_degree);
    pb + 2 + k as u64 + state.stack_depth() as u64 * pb
}

/// Largest value `memory_bits_helping` can take.
pub fn helping_memory_cap(k: usize, max_degree: u32, m: usize) -> u64 {
    let pb = port_bits(max_degree);
    2 * pb + 3 + round_bits(m) + k as u64 + k as u64 * pb
}

/// Largest value `memory_bits_independent` can take, with a full `k-1` stack.
pub fn independent_memory_cap(k: usize, max_degree: u32) -> u64 {
    let pb = port_bits(max_degree);
    pb + 2 + k as u64 + (k.saturating_sub(1)) as u64 * pb
}
