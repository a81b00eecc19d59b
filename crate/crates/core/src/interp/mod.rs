//! Small-step interpreter for the core language.

mod command;
mod exec;
mod explore;
mod runtime;
mod schedule;
mod state;
mod trace;
mod value;

pub use command::{default_value, interpret_body, interpret_expr, interpret_stmt, Command};
pub use exec::{
    exec_command, exec_step, exec_step_named, ExecError, Interleaver, InterleavingPolicy,
};
pub use explore::{explore_step, Exploration, Terminal};
pub use runtime::{Env, Instr, Layouts, Runtime, StepCode, StepId, StructLayout};
pub use schedule::{is_finished, next_call, peek_next_call, run_next, run_program, ProgramRun};
pub use state::{Frame, GlobalState, Instance};
pub use trace::{AccessKind, AccessRecord, AccessTrace};
pub use value::{Display, Label, Name, StructId, Value};

#[cfg(test)]
mod tests;
