//! Lock-step comparison of a machine with its compiled program.

use serde::Serialize;
use thiserror::Error;

use crate::compile::{compile, INIT, TRANSITION};
use crate::interp::{
    exec_step, next_call, AccessTrace, ExecError, GlobalState, Interleaver, InterleavingPolicy,
    Runtime,
};
use crate::tm::{initial_config, step, Configuration, InputError, Machine, StepOutcome, Symbol};

use super::extract::{config_equal, extract_config, ExtractError, ImplConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum BisimVerdict {
    Pass,
    Fail {
        /// Transitions taken before the divergence; 0 means right after init.
        at_step: u64,
        reason: String,
        tm: Configuration,
        implementation: ImplConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BisimReport {
    pub steps_compared: u64,
    #[serde(flatten)]
    pub verdict: BisimVerdict,
    /// Both sides halted together.
    pub halted: bool,
    /// The window ran out before either side halted.
    pub window_exhausted: bool,
    pub halt_agreement: bool,
    pub accept_agreement: bool,
}

impl BisimReport {
    pub fn passed(&self) -> bool {
        self.verdict == BisimVerdict::Pass && self.halt_agreement && self.accept_agreement
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("schedule reached `{found}` where `{expected}` was due")]
    Schedule {
        expected: &'static str,
        found: String,
    },
}

pub fn bisimulate(
    machine: &Machine,
    input: &[Symbol],
    max_steps: u64,
    policy: InterleavingPolicy,
) -> Result<BisimReport, BisimError> {
    bisimulate_with(machine, input, max_steps, policy, |_, _| {})
}

/// Like [`bisimulate`], handing every executed step's name and trace to
/// `observe`.
pub fn bisimulate_with(
    machine: &Machine,
    input: &[Symbol],
    max_steps: u64,
    policy: InterleavingPolicy,
    mut observe: impl FnMut(&str, &AccessTrace),
) -> Result<BisimReport, BisimError> {
    let mut tm = initial_config(machine, input)?;
    let rt = Runtime::new(compile(machine, input)?.lowered());
    let mut state = GlobalState::initial(&rt);
    let mut interleaver = Interleaver::new(policy);

    let mut run = |expected: &'static str, state: &mut GlobalState| -> Result<(), BisimError> {
        let id = next_call(&rt, state).filter(|id| &*rt.step(*id).name == expected);
        let Some(id) = id else {
            return Err(BisimError::Schedule {
                expected,
                found: next_call(&rt, state)
                    .map(|id| rt.step(id).name.to_string())
                    .unwrap_or_else(|| "end of schedule".into()),
            });
        };
        let trace = exec_step(&rt, state, id, &mut interleaver)?;
        state.pc += 1;
        observe(expected, &trace);
        Ok(())
    };

    run(INIT, &mut state)?;
    let mut imp = extract_config(&rt, &state)?;
    let fail = |at_step, reason: &str, tm: &Configuration, imp: &ImplConfig| BisimReport {
        steps_compared: at_step,
        verdict: BisimVerdict::Fail {
            at_step,
            reason: reason.to_string(),
            tm: tm.clone(),
            implementation: imp.clone(),
        },
        halted: false,
        window_exhausted: false,
        halt_agreement: true,
        accept_agreement: true,
    };
    if !config_equal(&tm, &imp.config()) {
        return Ok(fail(0, "configuration after init", &tm, &imp));
    }

    let mut steps: u64 = 0;
    let (halted, window_exhausted) = loop {
        let next = step(machine, &tm);
        if matches!(next, StepOutcome::Moved(_)) && steps == max_steps {
            break (false, true);
        }
        run(TRANSITION, &mut state)?;
        let productive = state.stability.last() == Some(&false);
        imp = extract_config(&rt, &state)?;
        match next {
            StepOutcome::Moved(c) => {
                tm = c;
                if !productive {
                    let mut r = fail(steps, "implementation stabilized first", &tm, &imp);
                    r.halt_agreement = false;
                    return Ok(r);
                }
                steps += 1;
                if !config_equal(&tm, &imp.config()) {
                    return Ok(fail(steps, "configuration after transition", &tm, &imp));
                }
            }
            StepOutcome::Halted => {
                if productive {
                    let mut r = fail(steps, "machine halted first", &tm, &imp);
                    r.halt_agreement = false;
                    return Ok(r);
                }
                if !config_equal(&tm, &imp.config()) {
                    return Ok(fail(steps, "configuration after halting", &tm, &imp));
                }
                break (true, false);
            }
        }
    };
    Ok(BisimReport {
        steps_compared: steps,
        verdict: BisimVerdict::Pass,
        halted,
        window_exhausted,
        halt_agreement: true,
        accept_agreement: imp.accepting == machine.is_accepting(tm.state),
    })
}
