//! Walking the flattened schedule.

use super::exec::{exec_step, ExecError, Interleaver, InterleavingPolicy};
use super::runtime::{Instr, Runtime, StepId};
use super::state::GlobalState;
use super::trace::AccessTrace;

/// Advances the cursor over fixpoint bookkeeping until it reaches a call or
/// the end of the schedule. Returns the step to run next, if any.
pub fn next_call(rt: &Runtime, state: &mut GlobalState) -> Option<StepId> {
    let schedule = rt.schedule();
    loop {
        match schedule.get(state.pc)? {
            Instr::Call(id) => return Some(*id),
            Instr::FixEnter => {
                state.stability.push(true);
                state.pc += 1;
            }
            Instr::FixEnd { body_start } => {
                let top = state
                    .stability
                    .last_mut()
                    .expect("every open fixpoint has a stability flag");
                if *top {
                    state.stability.pop();
                    state.pc += 1;
                } else {
                    *top = true;
                    state.pc = *body_start;
                }
            }
        }
    }
}

/// Like [`next_call`] but leaves `state` untouched.
pub fn peek_next_call(rt: &Runtime, state: &GlobalState) -> Option<StepId> {
    let mut probe = GlobalState {
        pc: state.pc,
        structs: Default::default(),
        stability: state.stability.clone(),
        next_serial: state.next_serial,
    };
    next_call(rt, &mut probe)
}

/// True once the cursor has run off the end of the schedule.
pub fn is_finished(rt: &Runtime, state: &GlobalState) -> bool {
    peek_next_call(rt, state).is_none()
}

/// Runs the next scheduled step and moves the cursor past it. Returns
/// `None` when the program has terminated.
pub fn run_next(
    rt: &Runtime,
    state: &mut GlobalState,
    interleaver: &mut Interleaver,
) -> Result<Option<(StepId, AccessTrace)>, ExecError> {
    let Some(id) = next_call(rt, state) else {
        return Ok(None);
    };
    let trace = exec_step(rt, state, id, interleaver)?;
    state.pc += 1;
    Ok(Some((id, trace)))
}

#[derive(Debug, Clone)]
pub struct ProgramRun {
    pub state: GlobalState,
    /// One entry per executed step, in order.
    pub traces: Vec<(StepId, AccessTrace)>,
    /// True if `fuel` step calls ran out before termination.
    pub fuel_exhausted: bool,
}

/// Runs from the initial state for at most `fuel` step calls.
pub fn run_program(
    rt: &Runtime,
    policy: InterleavingPolicy,
    fuel: usize,
) -> Result<ProgramRun, ExecError> {
    let mut state = GlobalState::initial(rt);
    let mut interleaver = Interleaver::new(policy);
    let mut traces = Vec::new();
    loop {
        if is_finished(rt, &state) {
            next_call(rt, &mut state);
            return Ok(ProgramRun {
                state,
                traces,
                fuel_exhausted: false,
            });
        }
        if traces.len() >= fuel {
            return Ok(ProgramRun {
                state,
                traces,
                fuel_exhausted: true,
            });
        }
        let step = run_next(rt, &mut state, &mut interleaver)?.expect("schedule not finished");
        traces.push(step);
    }
}
