use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::Label;

/// Chooses which unsettled robot runs its next iteration.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerPolicy {
    #[default]
    RoundRobin,
    SeededRandom {
        seed: u64,
    },
    /// Robot `i` runs roughly once per `weights[i-1]` time units; heavy
    /// weights stall a robot until the fairness bound forces it.
    AdversarialStalling {
        weights: Vec<u64>,
    },
}

impl SchedulerPolicy {
    /// Stalls a random half of the robots heavily and gives the rest small
    /// random delays.
    pub fn adversarial_from_seed(k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..k)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    8 * k as u64 + rng.gen_range(0..k as u64)
                } else {
                    rng.gen_range(1..=3)
                }
            })
            .collect();
        SchedulerPolicy::AdversarialStalling { weights }
    }
}

impl fmt::Display for SchedulerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchedulerPolicy::RoundRobin => f.write_str("round-robin"),
            SchedulerPolicy::SeededRandom { seed } => write!(f, "random({seed})"),
            SchedulerPolicy::AdversarialStalling { .. } => f.write_str("adversarial"),
        }
    }
}

/// Default fairness bound `B = 10k`.
pub fn default_fairness_bound(k: usize) -> u64 {
    10 * k as u64
}

/// Scheduler state for one run. No eligible robot is passed over more than
/// `bound` consecutive decisions: once a robot's wait reaches
/// `bound + 1 - k` the longest-waiting robot is picked regardless of policy,
/// which leaves room for every other robot to be served first. A bound
/// below `k - 1` cannot be honored and degrades to longest-wait-first.
#[derive(Debug)]
pub struct Scheduler {
    policy: SchedulerPolicy,
    rng: ChaCha8Rng,
    cursor: usize,
    next_at: Vec<u64>,
    waits: Vec<u64>,
    bound: u64,
}

impl Scheduler {
    pub fn new(policy: &SchedulerPolicy, k: usize, bound: u64) -> Self {
        let seed = match policy {
            SchedulerPolicy::SeededRandom { seed } => *seed,
            _ => 0,
        };
        let next_at = match policy {
            SchedulerPolicy::AdversarialStalling { weights } => {
                assert_eq!(weights.len(), k, "one delay weight per robot");
                weights.clone()
            }
            _ => vec![0; k],
        };
        Self {
            policy: policy.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            cursor: 0,
            next_at,
            waits: vec![0; k],
            bound: bound.max(1),
        }
    }

    /// Picks a robot among those with `eligible[label-1]` set. At least one
    /// must be eligible.
    pub fn pick(&mut self, eligible: &[bool]) -> Label {
        let k = eligible.len();
        let threshold = (self.bound + 1).saturating_sub(k as u64).max(1);
        let starving = (0..k)
            .filter(|&i| eligible[i] && self.waits[i] >= threshold)
            .max_by_key(|&i| (self.waits[i], std::cmp::Reverse(i)));
        let idx = match starving {
            Some(i) => i,
            None => match &self.policy {
                SchedulerPolicy::RoundRobin => (0..k)
                    .map(|off| (self.cursor + off) % k)
                    .find(|&i| eligible[i])
                    .expect("no eligible robot"),
                SchedulerPolicy::SeededRandom { .. } => {
                    let pool: Vec<usize> = (0..k).filter(|&i| eligible[i]).collect();
                    assert!(!pool.is_empty(), "no eligible robot");
                    pool[self.rng.gen_range(0..pool.len())]
                }
                SchedulerPolicy::AdversarialStalling { .. } => (0..k)
                    .filter(|&i| eligible[i])
                    .min_by_key(|&i| (self.next_at[i], i))
                    .expect("no eligible robot"),
            },
        };
        for (i, wait) in self.waits.iter_mut().enumerate() {
            if eligible[i] && i != idx {
                *wait += 1;
            }
        }
        self.activated(idx as Label + 1);
        self.cursor = (idx + 1) % k;
        idx as Label + 1
    }

    /// Records that `label` ran outside a scheduling decision (a parked
    /// MUTEX winner docking during another robot's iteration).
    pub fn activated(&mut self, label: Label) {
        let i = label as usize - 1;
        self.waits[i] = 0;
        if let SchedulerPolicy::AdversarialStalling { weights } = &self.policy {
            self.next_at[i] += weights[i];
        }
    }
}
