//! Per-iteration step functions for the three dispersion algorithms.
//!
//! A step maps `(state, local view, MUTEX outcome)` to `(state, action,
//! help effects)`. Steps are pure: the engine owns every mutation,
//! including updates to a docked robot's arrays, which steps only describe
//! through [`HelpEffect`]s. Nothing in a [`LocalView`] identifies a node.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{DockedArrays, HelpingState, IndependentState, Label, Mode, Port};

/// What a docked robot reports to a particular visitor: its `visited` and
/// `entry_port` entries for that visitor, before any update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub visited: bool,
    pub entry_port: Port,
}

impl VisitRecord {
    pub const FRESH: VisitRecord = VisitRecord {
        visited: false,
        entry_port: Port::NONE,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DockedView {
    pub label: Label,
    /// Present when the docked robot keeps helping arrays.
    pub record: Option<VisitRecord>,
}

/// Another undocked robot at the same node and the port it entered by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoLocated {
    pub label: Label,
    pub port_entered: Port,
}

#[derive(Debug, Clone, Copy)]
pub struct LocalView<'a> {
    pub degree: u32,
    /// Port by which the robot entered this node; `Port::NONE` before its
    /// first move.
    pub entry_port: Port,
    /// Robot docked here before this iteration began. In the asynchronous
    /// engine a MUTEX winner that docked within this iteration also shows
    /// up here, so a loser can talk to it.
    pub docked: Option<DockedView>,
    pub co_located: &'a [CoLocated],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Move(u32),
    Dock,
    Stay,
}

/// First-visit record written into `host`'s arrays on behalf of `visitor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelpEffect {
    pub host: Label,
    pub visitor: Label,
    pub port: Port,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step<S> {
    pub state: S,
    pub action: Action,
    pub help: Vec<HelpEffect>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("robot {0} is backtracking into a node with no docked robot")]
    BacktrackWithoutDock(Label),
    #[error("robot {0} reached a free node without a MUTEX outcome")]
    MissingMutex(Label),
    #[error("robot {0} met a docked robot that keeps no helping arrays")]
    MissingRecord(Label),
    #[error("robot {0} popped an empty stack")]
    EmptyStack(Label),
    #[error("robot {0} must move from a node of degree 0")]
    Isolated(Label),
    #[error("robot {0} must backtrack but has never entered its node")]
    NoEntryPort(Label),
}

fn move_through(label: Label, port: Port) -> Result<Action, StepError> {
    port.get()
        .map(Action::Move)
        .ok_or(StepError::NoEntryPort(label))
}

fn advance(label: Label, port: Port, degree: u32) -> Result<Port, StepError> {
    if degree == 0 {
        return Err(StepError::Isolated(label));
    }
    Ok(port.advance(degree))
}

/// Helping-Sync iteration at robot `state.core.label`.
///
/// A settled robot answers visitors passively; its part of the exchange is
/// carried by the visitors' help effects, so its own step is `Stay`.
pub fn helping_sync_step(
    state: HelpingState,
    view: &LocalView<'_>,
    mutex_winner: Option<Label>,
) -> Result<Step<HelpingState>, StepError> {
    helping_step(state, view, mutex_winner, true)
}

/// Helping-Async iteration. Differs from the synchronous body only at a
/// free node: the winner docks and stops without recording co-located
/// robots, and a loser asks the fresh winner for its record.
pub fn helping_async_step(
    state: HelpingState,
    view: &LocalView<'_>,
    mutex_winner: Option<Label>,
) -> Result<Step<HelpingState>, StepError> {
    helping_step(state, view, mutex_winner, false)
}

fn helping_step(
    mut s: HelpingState,
    view: &LocalView<'_>,
    mutex_winner: Option<Label>,
    synchronous: bool,
) -> Result<Step<HelpingState>, StepError> {
    let me = s.core.label;
    let mut help = Vec::new();
    if s.core.mode == Mode::Settled {
        s.core.round += 1;
        return Ok(Step {
            state: s,
            action: Action::Stay,
            help,
        });
    }
    if s.core.round > 0 {
        s.core.port_entered = view.entry_port;
        s.parent_ptr = view.entry_port;
        s.seen = false;
    }
    s.core.round += 1;

    let mut action = None;
    match s.core.mode {
        Mode::Explore => {
            if let Some(winner) = mutex_winner {
                if winner == me {
                    s.core.mode = Mode::Settled;
                    s.docked = Some(DockedArrays::new(s.label_space));
                    if synchronous {
                        help.extend(view.co_located.iter().map(|c| HelpEffect {
                            host: me,
                            visitor: c.label,
                            port: c.port_entered,
                        }));
                    }
                    action = Some(Action::Dock);
                } else if !synchronous {
                    let rec = view
                        .docked
                        .and_then(|d| d.record)
                        .unwrap_or(VisitRecord::FRESH);
                    s.seen = rec.visited;
                    s.parent_ptr = rec.entry_port;
                    if !s.seen {
                        s.parent_ptr = s.core.port_entered;
                        help.push(HelpEffect {
                            host: winner,
                            visitor: me,
                            port: s.core.port_entered,
                        });
                    }
                }
                // A synchronous loser's `port_entered` reaches the winner
                // through the winner's own co-located records.
            } else {
                let docked = view.docked.ok_or(StepError::MissingMutex(me))?;
                let rec = docked.record.ok_or(StepError::MissingRecord(me))?;
                s.seen = rec.visited;
                s.parent_ptr = rec.entry_port;
                if !s.seen {
                    s.parent_ptr = s.core.port_entered;
                    help.push(HelpEffect {
                        host: docked.label,
                        visitor: me,
                        port: s.core.port_entered,
                    });
                } else {
                    s.core.mode = Mode::Backtrack;
                    action = Some(move_through(me, s.core.port_entered)?);
                }
            }
            if s.core.mode == Mode::Explore {
                s.core.port_entered = advance(me, s.core.port_entered, view.degree)?;
                if s.core.port_entered == s.parent_ptr {
                    s.core.mode = Mode::Backtrack;
                }
                action = Some(move_through(me, s.core.port_entered)?);
            }
        }
        Mode::Backtrack => {
            let docked = view.docked.ok_or(StepError::BacktrackWithoutDock(me))?;
            let rec = docked.record.ok_or(StepError::MissingRecord(me))?;
            s.seen = rec.visited;
            s.parent_ptr = rec.entry_port;
            s.core.port_entered = advance(me, s.core.port_entered, view.degree)?;
            if s.core.port_entered != s.parent_ptr {
                s.core.mode = Mode::Explore;
            }
            action = Some(move_through(me, s.core.port_entered)?);
        }
        Mode::Settled => unreachable!(),
    }
    Ok(Step {
        state: s,
        action: action.expect("every branch acts"),
        help,
    })
}

/// A docked helping robot serving a visitor: returns the pre-update
/// `(visited[j], entry_port[j])` and the docked state with a first visit
/// recorded.
pub fn settled_service(
    docked: &HelpingState,
    visitor: Label,
    visitor_port: Port,
) -> (bool, Port, HelpingState) {
    let arrays = docked
        .docked
        .as_ref()
        .expect("settled_service on a robot without docked arrays");
    let before = (arrays.visited(visitor), arrays.entry_port(visitor));
    let mut next = docked.clone();
    if let Some(a) = next.docked.as_mut() {
        a.record(visitor, visitor_port);
    }
    (before.0, before.1, next)
}

/// Independent-Async iteration; the synchronous variant runs the same body
/// under the round engine.
pub fn independent_step(
    mut s: IndependentState,
    view: &LocalView<'_>,
    mutex_winner: Option<Label>,
) -> Result<Step<IndependentState>, StepError> {
    let me = s.core.label;
    if s.core.mode == Mode::Settled {
        s.core.round += 1;
        return Ok(Step {
            state: s,
            action: Action::Stay,
            help: Vec::new(),
        });
    }
    if s.core.round > 0 {
        s.core.port_entered = view.entry_port;
    }
    s.core.round += 1;

    let action = match s.core.mode {
        Mode::Explore => {
            // (label of the robot whose node this is, first visit?)
            let first_visit_of = match (mutex_winner, view.docked) {
                (Some(w), _) if w == me => {
                    s.core.mode = Mode::Settled;
                    return Ok(Step {
                        state: s,
                        action: Action::Dock,
                        help: Vec::new(),
                    });
                }
                (Some(w), _) => Some(w),
                (None, Some(d)) if s.has_visited(d.label) => None,
                (None, Some(d)) => Some(d.label),
                (None, None) => return Err(StepError::MissingMutex(me)),
            };
            match first_visit_of {
                None => {
                    s.core.mode = Mode::Backtrack;
                    move_through(me, s.core.port_entered)?
                }
                Some(j) => {
                    s.mark_visited(j);
                    s.stack.push(s.core.port_entered);
                    s.core.port_entered = advance(me, s.core.port_entered, view.degree)?;
                    if Some(&s.core.port_entered) == s.stack.last() {
                        s.core.mode = Mode::Backtrack;
                        s.stack.pop();
                    }
                    move_through(me, s.core.port_entered)?
                }
            }
        }
        Mode::Backtrack => {
            s.core.port_entered = advance(me, s.core.port_entered, view.degree)?;
            let top = *s.stack.last().ok_or(StepError::EmptyStack(me))?;
            if s.core.port_entered != top {
                s.core.mode = Mode::Explore;
            } else {
                s.stack.pop();
            }
            move_through(me, s.core.port_entered)?
        }
        Mode::Settled => unreachable!(),
    };
    Ok(Step {
        state: s,
        action,
        help: Vec::new(),
    })
}
