use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::{Label, Port};

/// How a MUTEX(node) call picks its single winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutexPolicy {
    #[default]
    LowestLabel,
    /// Earliest arrival, then lowest entry port, then lowest label.
    EarliestArrival,
}

impl fmt::Display for MutexPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MutexPolicy::LowestLabel => "lowest-label",
            MutexPolicy::EarliestArrival => "earliest-arrival",
        })
    }
}

impl FromStr for MutexPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lowest-label" => Ok(MutexPolicy::LowestLabel),
            "earliest-arrival" => Ok(MutexPolicy::EarliestArrival),
            other => Err(format!("unknown mutex policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contender {
    pub label: Label,
    pub entry_port: Port,
    /// Smaller is earlier. Robots still at their start node share 0.
    pub arrival_index: u64,
}

/// Picks the winner among robots contending for a free node.
///
/// Panics on an empty contender set.
pub fn arbitrate_mutex(contenders: &[Contender], policy: MutexPolicy) -> Label {
    let winner = match policy {
        MutexPolicy::LowestLabel => contenders.iter().min_by_key(|c| c.label),
        MutexPolicy::EarliestArrival => contenders
            .iter()
            .min_by_key(|c| (c.arrival_index, c.entry_port, c.label)),
    };
    winner.expect("MUTEX called with no contenders").label
}
