//! Command execution and step execution under an interleaving policy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lang::BinOp;

use super::command::Command;
use super::explore::explore_step;
use super::runtime::{Runtime, StepId};
use super::state::{GlobalState, Instance};
use super::trace::{AccessKind, AccessRecord, AccessTrace};
use super::value::{Label, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("{actor}: stack underflow")]
    StackUnderflow { actor: String },
    #[error("{actor}: expected {expected} on the stack, found {found}")]
    TypeConfusion {
        actor: String,
        expected: &'static str,
        found: String,
    },
    #[error("dangling label {0}")]
    DanglingLabel(String),
    #[error("{actor}: `{target}` has no variable `{name}`")]
    MissingVariable {
        actor: String,
        target: String,
        name: String,
    },
    #[error("{0} has no pending command")]
    NoCommand(String),
    #[error("{actor}: integer overflow")]
    Overflow { actor: String },
    #[error("{0} finished its step with a non-empty stack")]
    DirtyStack(String),
    #[error("unknown step `{0}`")]
    UnknownStep(String),
    #[error("state is not idle")]
    NotIdle,
    #[error("exploration bound of {bound} states exhausted")]
    BoundExhausted { bound: usize },
    #[error("step `{step}` reached {outcomes} distinct results")]
    Nondeterministic { step: String, outcomes: usize },
}

/// How the commands of concurrently executing instances are interleaved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InterleavingPolicy {
    /// One command per active instance in label order, cyclically.
    RoundRobin,
    /// Uniformly random active instance, from a seeded generator.
    SeededRandom(u64),
    /// Every interleaving, up to this many distinct explored states.
    ExhaustiveBounded(usize),
}

/// Per-run scheduling state for a policy.
#[derive(Debug, Clone)]
pub struct Interleaver {
    policy: InterleavingPolicy,
    rng: Option<ChaCha8Rng>,
    last: Option<Label>,
}

impl Interleaver {
    pub fn new(policy: InterleavingPolicy) -> Self {
        let rng = match policy {
            InterleavingPolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Interleaver {
            policy,
            rng,
            last: None,
        }
    }

    pub fn policy(&self) -> InterleavingPolicy {
        self.policy
    }

    /// Chooses the next instance to run. `active` is nonempty and sorted.
    pub fn pick(&mut self, active: &[Label]) -> Label {
        let next = match &mut self.rng {
            Some(rng) => active[rng.gen_range(0..active.len())],
            None => match self.last {
                Some(last) => active
                    .iter()
                    .copied()
                    .find(|l| *l > last)
                    .unwrap_or(active[0]),
                None => active[0],
            },
        };
        self.last = Some(next);
        next
    }
}

struct Ctx<'a> {
    rt: &'a Runtime,
    actor: Label,
}

impl Ctx<'_> {
    fn who(&self) -> String {
        self.rt.layouts().label(self.actor).to_string()
    }

    fn underflow(&self) -> ExecError {
        ExecError::StackUnderflow { actor: self.who() }
    }

    fn confused(&self, expected: &'static str, found: Value) -> ExecError {
        ExecError::TypeConfusion {
            actor: self.who(),
            expected,
            found: self.rt.layouts().value(found).to_string(),
        }
    }

    fn actor<'s>(&self, state: &'s mut GlobalState) -> Result<&'s mut Instance, ExecError> {
        state
            .structs
            .get_mut(&self.actor)
            .ok_or_else(|| ExecError::DanglingLabel(self.who()))
    }

    fn pop(&self, state: &mut GlobalState) -> Result<Value, ExecError> {
        self.actor(state)?
            .stack
            .pop()
            .ok_or_else(|| self.underflow())
    }

    fn pop_label(&self, state: &mut GlobalState) -> Result<Label, ExecError> {
        match self.pop(state)? {
            Value::Ref(l) => Ok(l),
            other => Err(self.confused("reference", other)),
        }
    }

    fn pop_bool(&self, state: &mut GlobalState) -> Result<bool, ExecError> {
        match self.pop(state)? {
            Value::Bool(b) => Ok(b),
            other => Err(self.confused("Bool", other)),
        }
    }

    fn push(&self, state: &mut GlobalState, v: Value) -> Result<(), ExecError> {
        self.actor(state)?.stack.push(v);
        Ok(())
    }

    fn missing(&self, target: Label, name: &str) -> ExecError {
        ExecError::MissingVariable {
            actor: self.who(),
            target: self.rt.layouts().label(target).to_string(),
            name: name.to_string(),
        }
    }
}

fn apply_op(ctx: &Ctx<'_>, op: BinOp, lhs: Value, rhs: Value) -> Result<Value, ExecError> {
    use Value::{Bool, Int};
    Ok(match (op, lhs, rhs) {
        (BinOp::Eq | BinOp::Ne, l, r) => {
            if std::mem::discriminant(&l) != std::mem::discriminant(&r) {
                return Err(ctx.confused(l.kind(), r));
            }
            Bool((l == r) == (op == BinOp::Eq))
        }
        (BinOp::And, Bool(a), Bool(b)) => Bool(a && b),
        (BinOp::Or, Bool(a), Bool(b)) => Bool(a || b),
        (BinOp::And | BinOp::Or, Bool(_), other) | (BinOp::And | BinOp::Or, other, _) => {
            return Err(ctx.confused("Bool", other))
        }
        (BinOp::Add, Int(a), Int(b)) => Int(a
            .checked_add(b)
            .ok_or(ExecError::Overflow { actor: ctx.who() })?),
        (BinOp::Sub, Int(a), Int(b)) => Int(a
            .checked_sub(b)
            .ok_or(ExecError::Overflow { actor: ctx.who() })?),
        (BinOp::Lt, Int(a), Int(b)) => Bool(a < b),
        (BinOp::Le, Int(a), Int(b)) => Bool(a <= b),
        (_, Int(_), other) | (_, other, _) => return Err(ctx.confused("Int", other)),
    })
}

/// Executes the next command of `actor`, appending parameter accesses to
/// `trace`.
pub fn exec_command(
    rt: &Runtime,
    state: &mut GlobalState,
    actor: Label,
    trace: &mut AccessTrace,
) -> Result<(), ExecError> {
    let ctx = Ctx { rt, actor };
    let layouts = rt.layouts();
    let cmd = ctx
        .actor(state)?
        .take_command()
        .ok_or_else(|| ExecError::NoCommand(ctx.who()))?;
    let index = trace.commands;
    trace.commands += 1;

    match cmd {
        Command::PushThis => ctx.push(state, Value::Ref(actor))?,
        Command::Push(v) => ctx.push(state, v)?,
        Command::Read(name) => {
            let target = ctx.pop_label(state)?;
            let value = state
                .read(target, &name)
                .ok_or_else(|| ctx.missing(target, &name))?;
            if layouts.get(target.ty).has_param(&name) {
                trace.records.push(AccessRecord {
                    index,
                    actor,
                    target,
                    field: name,
                    kind: AccessKind::Read,
                    old: value,
                    new: value,
                });
            }
            ctx.push(state, value)?;
        }
        Command::Write(name) => {
            let target = ctx.pop_label(state)?;
            let value = ctx.pop(state)?;
            let is_param = layouts.get(target.ty).has_param(&name);
            let instance = state
                .structs
                .get_mut(&target)
                .ok_or_else(|| ExecError::DanglingLabel(layouts.label(target).to_string()))?;
            if !is_param {
                // Locals live in the actor's own environment and are never
                // subject to the nil write guard.
                instance.env.insert(name, value);
            } else {
                let old = *instance
                    .env
                    .get(&name)
                    .ok_or_else(|| ctx.missing(target, &name))?;
                let kind = if target.is_nil() {
                    AccessKind::WriteSkip
                } else {
                    instance.env.insert(name.clone(), value);
                    AccessKind::Write
                };
                trace.records.push(AccessRecord {
                    index,
                    actor,
                    target,
                    field: name,
                    kind,
                    old,
                    new: value,
                });
                if kind == AccessKind::Write && old != value {
                    state.reset_stability();
                }
            }
        }
        Command::Cons(ty) => {
            let layout = layouts.get(ty);
            let n = layout.params.len();
            let stack = &mut ctx.actor(state)?.stack;
            if stack.len() < n {
                return Err(ctx.underflow());
            }
            let args = stack.split_off(stack.len() - n);
            let mut env = rt.default_env(ty).clone();
            for ((name, _), v) in layout.params.iter().zip(args) {
                env.insert(name.clone(), v);
            }
            let label = state.allocate(ty);
            state.structs.insert(label, Instance::new(ty, env));
            state.reset_stability();
            ctx.push(state, Value::Ref(label))?;
        }
        Command::Not => {
            let b = ctx.pop_bool(state)?;
            ctx.push(state, Value::Bool(!b))?;
        }
        Command::Op(op) => {
            let rhs = ctx.pop(state)?;
            let lhs = ctx.pop(state)?;
            let v = apply_op(&ctx, op, lhs, rhs)?;
            ctx.push(state, v)?;
        }
        Command::If(block) => {
            if ctx.pop_bool(state)? {
                ctx.actor(state)?.push_block(block);
            }
        }
        Command::Discard => {
            ctx.pop(state)?;
        }
    }
    Ok(())
}

/// Hands the step body to every instance of the owning struct that exists
/// now, the nil instance included.
pub(crate) fn begin_step(rt: &Runtime, state: &mut GlobalState, step: StepId) {
    let code = rt.step(step);
    for (label, instance) in state.structs.iter_mut() {
        if label.ty == code.owner {
            instance.push_block(code.code.clone());
        }
    }
}

/// Drops step-local variables once every command list is empty.
pub(crate) fn end_step(rt: &Runtime, state: &mut GlobalState) -> Result<(), ExecError> {
    for (label, instance) in state.structs.iter_mut() {
        if !instance.stack.is_empty() {
            return Err(ExecError::DirtyStack(
                rt.layouts().label(*label).to_string(),
            ));
        }
        let layout = rt.layouts().get(instance.ty);
        instance.env.retain(|name, _| layout.has_param(name));
    }
    Ok(())
}

/// Runs one step to completion from an idle state. Does not move the
/// schedule cursor.
pub fn exec_step(
    rt: &Runtime,
    state: &mut GlobalState,
    step: StepId,
    interleaver: &mut Interleaver,
) -> Result<AccessTrace, ExecError> {
    if !state.is_idle() {
        return Err(ExecError::NotIdle);
    }
    if let InterleavingPolicy::ExhaustiveBounded(bound) = interleaver.policy() {
        let exploration = explore_step(rt, state, step, bound)?;
        if !exploration.complete {
            return Err(ExecError::BoundExhausted { bound });
        }
        let mut digests: Vec<String> = exploration
            .terminals
            .iter()
            .map(|t| crate::conformance::canonicalize(rt, &t.state).digest)
            .collect();
        digests.sort();
        digests.dedup();
        if digests.len() != 1 {
            return Err(ExecError::Nondeterministic {
                step: rt.step(step).name.to_string(),
                outcomes: digests.len(),
            });
        }
        let first = exploration
            .terminals
            .into_iter()
            .next()
            .expect("a complete exploration reaches a terminal state");
        *state = first.state;
        return Ok(first.trace);
    }

    interleaver.last = None;
    begin_step(rt, state, step);
    let mut trace = AccessTrace::new();
    loop {
        let active = state.active();
        if active.is_empty() {
            break;
        }
        let actor = interleaver.pick(&active);
        exec_command(rt, state, actor, &mut trace)?;
    }
    end_step(rt, state)?;
    Ok(trace)
}

pub fn exec_step_named(
    rt: &Runtime,
    state: &mut GlobalState,
    step: &str,
    interleaver: &mut Interleaver,
) -> Result<AccessTrace, ExecError> {
    let id = rt
        .step_id(step)
        .ok_or_else(|| ExecError::UnknownStep(step.to_string()))?;
    exec_step(rt, state, id, interleaver)
}
