//! Turing machine to AuDaLa compiler.
//!
//! The output has a fixed shape: a `TapeCell` struct holding one tape cell
//! and its neighbours, a `Control` struct holding the head, the state and
//! whether that state is accepting, and the schedule `init < Fix(transition)`.

use std::collections::BTreeMap;

use crate::lang::{
    lower, pretty_print, Expression as E, LoweredProgram, Param, Program, Schedule, Statement as S,
    Step, StructDef, TypeRef,
};
use crate::tm::{Action, Direction, InputError, Machine, StateId, Symbol};

pub const TAPE_CELL: &str = "TapeCell";
pub const CONTROL: &str = "Control";
pub const INIT: &str = "init";
pub const TRANSITION: &str = "transition";

#[derive(Debug, Clone)]
pub struct CompilationOutput {
    /// Surface program, with the transition clauses as one else-if chain.
    pub program: Program,
    /// Position of each clause in the chain.
    pub clause_index: BTreeMap<(StateId, Symbol), usize>,
    pub cell_count: usize,
}

impl CompilationOutput {
    pub fn source(&self) -> String {
        pretty_print(&self.program)
    }

    pub fn lowered(&self) -> LoweredProgram {
        lower(&self.program).expect("compiled programs are well formed")
    }
}

pub fn compile(machine: &Machine, input: &[Symbol]) -> Result<CompilationOutput, InputError> {
    machine.check_input(input)?;
    let clause_index = machine
        .transitions()
        .enumerate()
        .map(|(i, t)| ((t.state, t.read), i))
        .collect();
    let tape_cell = StructDef {
        name: TAPE_CELL.into(),
        params: vec![
            Param::new("left", TypeRef::named(TAPE_CELL)),
            Param::new("right", TypeRef::named(TAPE_CELL)),
            Param::new("symbol", TypeRef::Int),
        ],
        steps: vec![],
        pos: Default::default(),
    };
    let control = StructDef {
        name: CONTROL.into(),
        params: vec![
            Param::new("head", TypeRef::named(TAPE_CELL)),
            Param::new("state", TypeRef::Int),
            Param::new("accepting", TypeRef::Bool),
        ],
        steps: vec![
            emit_transition(machine),
            Step::new(INIT, emit_init(machine, input)),
        ],
        pos: Default::default(),
    };
    Ok(CompilationOutput {
        program: Program {
            structs: vec![tape_cell, control],
            schedule: Schedule::seq(
                Schedule::call(INIT),
                Schedule::fix(Schedule::call(TRANSITION)),
            ),
        },
        clause_index,
        cell_count: input.len(),
    })
}

fn cell(i: usize) -> String {
    format!("cell{i}")
}

/// Builds the tape from `input` and creates the single `Control`.
pub fn emit_init(machine: &Machine, input: &[Symbol]) -> Vec<S> {
    assert!(!input.is_empty(), "input must be nonempty");
    let mut body: Vec<S> = input
        .iter()
        .enumerate()
        .map(|(i, s)| {
            S::declare(
                TypeRef::named(TAPE_CELL),
                &cell(i),
                E::cons(TAPE_CELL, vec![E::null(), E::null(), E::Int(s.0)]),
            )
        })
        .collect();
    for i in 1..input.len() {
        let (prev, cur) = (cell(i - 1), cell(i));
        body.push(S::update(&[&cur], "left", E::path(&[&prev])));
        body.push(S::update(&[&prev], "right", E::path(&[&cur])));
    }
    body.push(S::Expr(E::cons(
        CONTROL,
        vec![
            E::path(&[&cell(0)]),
            E::Int(StateId::INITIAL.0),
            E::Bool(machine.is_accepting(StateId::INITIAL)),
        ],
    )));
    body
}

/// Guard and body of the clause for `delta(q, s) = action`.
pub fn emit_clause(machine: &Machine, q: StateId, s: Symbol, action: Action) -> (E, Vec<S>) {
    let guard = E::and(
        E::eq(E::path(&["state"]), E::Int(q.0)),
        E::eq(E::path(&["head", "symbol"]), E::Int(s.0)),
    );
    let (side, new_cell) = match action.dir {
        Direction::R => (
            "right",
            vec![E::path(&["head"]), E::null(), E::Int(Symbol::BLANK.0)],
        ),
        Direction::L => (
            "left",
            vec![E::null(), E::path(&["head"]), E::Int(Symbol::BLANK.0)],
        ),
    };
    let body = vec![
        S::update(&["head"], "symbol", E::Int(action.write.0)),
        S::assign("state", E::Int(action.next.0)),
        S::assign("accepting", E::Bool(machine.is_accepting(action.next))),
        S::IfThen {
            cond: E::and(
                E::ne(E::path(&["head"]), E::null()),
                E::eq(E::path(&["head", side]), E::null()),
            ),
            body: vec![S::update(&["head"], side, E::cons(TAPE_CELL, new_cell))],
        },
        S::assign("head", E::path(&["head", side])),
    ];
    (guard, body)
}

/// One clause per delta entry in ascending `(q, s)` order, chained with
/// `else if`.
pub fn emit_transition(machine: &Machine) -> Step {
    let clauses: Vec<(E, Vec<S>)> = machine
        .transitions()
        .map(|t| emit_clause(machine, t.state, t.read, t.action))
        .collect();
    let mut chain: Vec<S> = Vec::new();
    for (guard, body) in clauses.into_iter().rev() {
        chain = vec![if chain.is_empty() {
            S::IfThen { cond: guard, body }
        } else {
            S::IfThenElse {
                cond: guard,
                then_body: body,
                else_body: chain,
            }
        }];
    }
    Step::new(TRANSITION, chain)
}
