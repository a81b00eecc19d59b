//! Exhaustive enumeration of the interleavings of one step.

use std::collections::HashSet;

use super::exec::{begin_step, end_step, exec_command, ExecError};
use super::runtime::{Runtime, StepId};
use super::state::GlobalState;
use super::trace::AccessTrace;

/// A distinct final state of the step, with the trace of the first
/// interleaving that reached it.
#[derive(Debug, Clone)]
pub struct Terminal {
    pub state: GlobalState,
    pub trace: AccessTrace,
}

#[derive(Debug, Clone)]
pub struct Exploration {
    /// Distinct terminal states in discovery order, locals already dropped.
    pub terminals: Vec<Terminal>,
    /// Distinct intermediate states visited, the start state included.
    pub explored: usize,
    /// False if the bound cut the search short.
    pub complete: bool,
    /// Every access performed on any explored path.
    pub accesses: AccessTrace,
}

/// Depth-first search over every choice of next instance, memoising
/// states already seen. At most `bound` states are visited.
pub fn explore_step(
    rt: &Runtime,
    start: &GlobalState,
    step: StepId,
    bound: usize,
) -> Result<Exploration, ExecError> {
    if !start.is_idle() {
        return Err(ExecError::NotIdle);
    }
    let mut root = start.clone();
    begin_step(rt, &mut root, step);

    let mut visited: HashSet<GlobalState> = HashSet::new();
    let mut seen_terminals: HashSet<GlobalState> = HashSet::new();
    let mut out = Exploration {
        terminals: Vec::new(),
        explored: 0,
        complete: true,
        accesses: AccessTrace::new(),
    };
    if bound == 0 {
        out.complete = false;
        return Ok(out);
    }
    visited.insert(root.clone());

    // Each entry is a state and the trace that led to it.
    let mut stack = vec![(root, AccessTrace::new())];
    while let Some((state, trace)) = stack.pop() {
        let active = state.active();
        if active.is_empty() {
            let mut done = state;
            end_step(rt, &mut done)?;
            if seen_terminals.insert(done.clone()) {
                out.terminals.push(Terminal { state: done, trace });
            }
            continue;
        }
        // Reverse so the lowest label is explored first.
        for actor in active.into_iter().rev() {
            let mut next = state.clone();
            let mut next_trace = trace.clone();
            let before = next_trace.records.len();
            exec_command(rt, &mut next, actor, &mut next_trace)?;
            out.accesses
                .records
                .extend_from_slice(&next_trace.records[before..]);
            if visited.contains(&next) {
                continue;
            }
            if visited.len() >= bound {
                out.complete = false;
                out.explored = visited.len();
                return Ok(out);
            }
            visited.insert(next.clone());
            stack.push((next, next_trace));
        }
    }
    out.explored = visited.len();
    out.accesses.commands = out.accesses.records.len() as u64;
    Ok(out)
}
