//! Reading a Turing machine configuration back out of an interpreter state.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::compile::{CONTROL, TAPE_CELL};
use crate::interp::{GlobalState, Label, Runtime, StructId, Value};
use crate::tm::{Configuration, StateId, Symbol, Tape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("state is not idle")]
    NotIdle,
    #[error("program has no `{0}` struct")]
    MissingStruct(&'static str),
    #[error("expected exactly one non-nil Control, found {0}")]
    ControlCount(usize),
    #[error("tape links form a cycle at {0}")]
    Cycle(String),
    #[error("tape links are not mutually inverse at {0}")]
    InconsistentLink(String),
    #[error("{label}.{field} holds {found}, expected {expected}")]
    BadValue {
        label: String,
        field: &'static str,
        found: String,
        expected: &'static str,
    },
}

/// The configuration an implementation state represents, plus the
/// `accepting` flag of its control.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImplConfig {
    pub state: StateId,
    pub accepting: bool,
    pub tape: Tape,
}

impl ImplConfig {
    pub fn config(&self) -> Configuration {
        Configuration {
            state: self.state,
            tape: self.tape.clone(),
        }
    }
}

struct Reader<'a> {
    rt: &'a Runtime,
    state: &'a GlobalState,
    tape_cell: StructId,
}

impl Reader<'_> {
    fn name(&self, l: Label) -> String {
        self.rt.layouts().label(l).to_string()
    }

    fn get(&self, l: Label, field: &'static str) -> Value {
        self.state
            .read(l, field)
            .expect("compiled struct layouts have this field")
    }

    fn bad(&self, l: Label, field: &'static str, v: Value, expected: &'static str) -> ExtractError {
        ExtractError::BadValue {
            label: self.name(l),
            field,
            found: self.rt.layouts().value(v).to_string(),
            expected,
        }
    }

    fn int(&self, l: Label, field: &'static str) -> Result<i64, ExtractError> {
        match self.get(l, field) {
            Value::Int(v) => Ok(v),
            v => Err(self.bad(l, field, v, "Int")),
        }
    }

    fn bool(&self, l: Label, field: &'static str) -> Result<bool, ExtractError> {
        match self.get(l, field) {
            Value::Bool(v) => Ok(v),
            v => Err(self.bad(l, field, v, "Bool")),
        }
    }

    fn cell(&self, l: Label, field: &'static str) -> Result<Label, ExtractError> {
        match self.get(l, field) {
            Value::Ref(r) if r.ty == self.tape_cell => Ok(r),
            v => Err(self.bad(l, field, v, "TapeCell")),
        }
    }
}

/// Reads `(state, tape)` off the single non-nil `Control`: the head cell is
/// index 0 and the `left`/`right` chains give the negative and positive
/// indices up to the first nil link.
pub fn extract_config(rt: &Runtime, state: &GlobalState) -> Result<ImplConfig, ExtractError> {
    if !state.is_idle() {
        return Err(ExtractError::NotIdle);
    }
    let layouts = rt.layouts();
    let control = layouts
        .id(CONTROL)
        .ok_or(ExtractError::MissingStruct(CONTROL))?;
    let tape_cell = layouts
        .id(TAPE_CELL)
        .ok_or(ExtractError::MissingStruct(TAPE_CELL))?;
    let controls = state.non_nil_of(control);
    let [c] = controls[..] else {
        return Err(ExtractError::ControlCount(controls.len()));
    };
    let r = Reader {
        rt,
        state,
        tape_cell,
    };
    let q = StateId(r.int(c, "state")?);
    let accepting = r.bool(c, "accepting")?;
    let head = r.cell(c, "head")?;

    let mut tape = Tape::new();
    if !head.is_nil() {
        tape.set(0, Symbol(r.int(head, "symbol")?));
        let mut seen = BTreeSet::from([head]);
        for (forward, back, sign) in [("right", "left", 1), ("left", "right", -1)] {
            let mut prev = head;
            let mut cur = r.cell(head, forward)?;
            let mut i: i64 = 0;
            while !cur.is_nil() {
                i += 1;
                if !seen.insert(cur) {
                    return Err(ExtractError::Cycle(r.name(cur)));
                }
                let back_link = r.cell(cur, back)?;
                if !back_link.is_nil() && back_link != prev {
                    return Err(ExtractError::InconsistentLink(r.name(cur)));
                }
                tape.set(sign * i, Symbol(r.int(cur, "symbol")?));
                prev = cur;
                cur = r.cell(cur, forward)?;
            }
        }
    }
    Ok(ImplConfig {
        state: q,
        accepting,
        tape,
    })
}

/// Equal states and equal symbols at every index. Tapes never store blanks,
/// so this is plain equality.
pub fn config_equal(a: &Configuration, b: &Configuration) -> bool {
    a.state == b.state && a.tape == b.tape
}
