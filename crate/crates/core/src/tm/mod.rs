//! Deterministic single-tape Turing machines with a head-recentering tape.
//!
//! The head always sits at index 0. A transition rewrites the head cell and
//! then shifts the whole tape one position, so the new head cell is again at
//! index 0.

mod format;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use format::{parse_input, parse_machine, FormatError};

/// A tape symbol. The blank symbol is `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Symbol(pub i64);

impl Symbol {
    pub const BLANK: Symbol = Symbol(0);

    pub fn is_blank(self) -> bool {
        self == Self::BLANK
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A control state. The initial state is `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct StateId(pub i64);

impl StateId {
    pub const INITIAL: StateId = StateId(0);
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Direction {
    L,
    R,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::L => f.write_str("L"),
            Direction::R => f.write_str("R"),
        }
    }
}

/// Right-hand side of a transition: `(q', s', D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Action {
    pub next: StateId,
    pub write: Symbol,
    pub dir: Direction,
}

/// One entry `delta(state, read) = action`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Transition {
    pub state: StateId,
    pub read: Symbol,
    pub action: Action,
}

impl Transition {
    pub fn new(state: i64, read: i64, next: i64, write: i64, dir: Direction) -> Self {
        Transition {
            state: StateId(state),
            read: Symbol(read),
            action: Action {
                next: StateId(next),
                write: Symbol(write),
                dir,
            },
        }
    }
}

/// The raw 7-tuple as loaded. Nothing is checked until [`validate`] runs;
/// `delta` is a list so that duplicate entries can be reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuringMachine {
    pub states: BTreeSet<StateId>,
    pub accepting: BTreeSet<StateId>,
    pub tape_alphabet: BTreeSet<Symbol>,
    pub input_alphabet: BTreeSet<Symbol>,
    pub blank: Symbol,
    pub initial: StateId,
    pub delta: Vec<Transition>,
}

impl TuringMachine {
    /// Builds a machine whose state set and tape alphabet are everything the
    /// transitions and accepting set mention, plus `0` for both.
    pub fn from_parts(
        delta: Vec<Transition>,
        accepting: impl IntoIterator<Item = i64>,
        input_alphabet: impl IntoIterator<Item = i64>,
    ) -> Self {
        let accepting: BTreeSet<StateId> = accepting.into_iter().map(StateId).collect();
        let input_alphabet: BTreeSet<Symbol> = input_alphabet.into_iter().map(Symbol).collect();
        let mut states: BTreeSet<StateId> = accepting.clone();
        states.insert(StateId::INITIAL);
        let mut tape_alphabet = input_alphabet.clone();
        tape_alphabet.insert(Symbol::BLANK);
        for t in &delta {
            states.insert(t.state);
            states.insert(t.action.next);
            tape_alphabet.insert(t.read);
            tape_alphabet.insert(t.action.write);
        }
        TuringMachine {
            states,
            accepting,
            tape_alphabet,
            input_alphabet,
            blank: Symbol::BLANK,
            initial: StateId::INITIAL,
            delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    InitialNotZero(StateId),
    BlankNotZero(Symbol),
    InitialNotAState(StateId),
    AcceptingNotAState(StateId),
    InputNotInTape(Symbol),
    BlankInInput,
    BlankNotInTape,
    DeltaOnAccepting(StateId),
    UnknownState(StateId),
    UnknownSymbol(Symbol),
    Nondeterministic(StateId, Symbol),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InitialNotZero(q) => write!(f, "initial state must be 0, found {q}"),
            Violation::BlankNotZero(s) => write!(f, "blank symbol must be 0, found {s}"),
            Violation::InitialNotAState(q) => write!(f, "initial state {q} is not a state"),
            Violation::AcceptingNotAState(q) => write!(f, "accepting state {q} is not a state"),
            Violation::InputNotInTape(s) => {
                write!(f, "input symbol {s} not in tape alphabet")
            }
            Violation::BlankInInput => f.write_str("blank symbol in input alphabet"),
            Violation::BlankNotInTape => f.write_str("blank symbol not in tape alphabet"),
            Violation::DeltaOnAccepting(q) => {
                write!(f, "delta defined on accepting state {q}")
            }
            Violation::UnknownState(q) => write!(f, "delta mentions unknown state {q}"),
            Violation::UnknownSymbol(s) => write!(f, "symbol {s} not in tape alphabet"),
            Violation::Nondeterministic(q, s) => {
                write!(
                    f,
                    "nondeterministic delta: more than one entry for ({q}, {s})"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid machine: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("empty input")]
    Empty,
    #[error("symbol not in input alphabet: {0}")]
    NotInInputAlphabet(Symbol),
}

/// A machine that passed [`validate`]. The transition function is a map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    raw: TuringMachine,
    delta: BTreeMap<(StateId, Symbol), Action>,
}

pub fn validate(machine: TuringMachine) -> Result<Machine, ValidationError> {
    let mut violations = Vec::new();
    let m = &machine;
    if m.initial != StateId::INITIAL {
        violations.push(Violation::InitialNotZero(m.initial));
    }
    if m.blank != Symbol::BLANK {
        violations.push(Violation::BlankNotZero(m.blank));
    }
    if !m.states.contains(&m.initial) {
        violations.push(Violation::InitialNotAState(m.initial));
    }
    for q in &m.accepting {
        if !m.states.contains(q) {
            violations.push(Violation::AcceptingNotAState(*q));
        }
    }
    for s in &m.input_alphabet {
        if !m.tape_alphabet.contains(s) {
            violations.push(Violation::InputNotInTape(*s));
        }
    }
    if m.input_alphabet.contains(&m.blank) {
        violations.push(Violation::BlankInInput);
    }
    if !m.tape_alphabet.contains(&m.blank) {
        violations.push(Violation::BlankNotInTape);
    }

    let mut delta = BTreeMap::new();
    for t in &m.delta {
        if m.accepting.contains(&t.state) {
            violations.push(Violation::DeltaOnAccepting(t.state));
        }
        for q in [t.state, t.action.next] {
            if !m.states.contains(&q) {
                violations.push(Violation::UnknownState(q));
            }
        }
        for s in [t.read, t.action.write] {
            if !m.tape_alphabet.contains(&s) {
                violations.push(Violation::UnknownSymbol(s));
            }
        }
        if delta.insert((t.state, t.read), t.action).is_some() {
            violations.push(Violation::Nondeterministic(t.state, t.read));
        }
    }

    if violations.is_empty() {
        Ok(Machine {
            raw: machine,
            delta,
        })
    } else {
        Err(ValidationError { violations })
    }
}

impl Machine {
    pub fn raw(&self) -> &TuringMachine {
        &self.raw
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.raw.accepting
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.raw.accepting.contains(&q)
    }

    pub fn input_alphabet(&self) -> &BTreeSet<Symbol> {
        &self.raw.input_alphabet
    }

    pub fn delta(&self, q: StateId, s: Symbol) -> Option<Action> {
        self.delta.get(&(q, s)).copied()
    }

    /// Transitions in ascending `(state, read)` order.
    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.delta
            .iter()
            .map(|(&(state, read), &action)| Transition {
                state,
                read,
                action,
            })
    }

    pub fn check_input(&self, input: &[Symbol]) -> Result<(), InputError> {
        if input.is_empty() {
            return Err(InputError::Empty);
        }
        match input.iter().find(|s| !self.raw.input_alphabet.contains(s)) {
            Some(&s) => Err(InputError::NotInInputAlphabet(s)),
            None => Ok(()),
        }
    }
}

/// A tape function `Z -> Gamma` with finite support. Blank cells are never
/// stored, so two tapes are equal iff they agree at every index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Tape {
    cells: BTreeMap<i64, Symbol>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// The tape holding `input` at indices `0..input.len()`.
    pub fn from_input(input: &[Symbol]) -> Self {
        input
            .iter()
            .enumerate()
            .map(|(i, &s)| (i as i64, s))
            .collect()
    }

    pub fn get(&self, index: i64) -> Symbol {
        self.cells.get(&index).copied().unwrap_or(Symbol::BLANK)
    }

    pub fn set(&mut self, index: i64, symbol: Symbol) {
        if symbol.is_blank() {
            self.cells.remove(&index);
        } else {
            self.cells.insert(index, symbol);
        }
    }

    pub fn head(&self) -> Symbol {
        self.get(0)
    }

    /// Indices holding a non-blank symbol, ascending.
    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.cells.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.cells.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Symbol)> + '_ {
        self.cells.iter().map(|(&i, &s)| (i, s))
    }

    /// Writes `symbol` under the head and shifts the tape for a move in `dir`.
    pub fn write_and_shift(&self, symbol: Symbol, dir: Direction) -> Tape {
        let (offset, written_at) = match dir {
            // t'(i) = t(i+1), t'(-1) = s'
            Direction::R => (-1, -1),
            // t'(i) = t(i-1), t'(1) = s'
            Direction::L => (1, 1),
        };
        let mut next: Tape = self
            .cells
            .iter()
            .filter(|(&i, _)| i != 0)
            .map(|(&i, &s)| (i + offset, s))
            .collect();
        next.set(written_at, symbol);
        next
    }
}

impl FromIterator<(i64, Symbol)> for Tape {
    fn from_iter<I: IntoIterator<Item = (i64, Symbol)>>(iter: I) -> Self {
        let mut tape = Tape::new();
        for (i, s) in iter {
            tape.set(i, s);
        }
        tape
    }
}

impl fmt::Display for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, (i, s)) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{i}:{s}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Configuration {
    pub state: StateId,
    pub tape: Tape,
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state={} tape={}", self.state, self.tape)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Moved(Configuration),
    Halted,
}

pub fn initial_config(machine: &Machine, input: &[Symbol]) -> Result<Configuration, InputError> {
    machine.check_input(input)?;
    Ok(Configuration {
        state: StateId::INITIAL,
        tape: Tape::from_input(input),
    })
}

pub fn step(machine: &Machine, config: &Configuration) -> StepOutcome {
    match machine.delta(config.state, config.tape.head()) {
        None => StepOutcome::Halted,
        Some(action) => StepOutcome::Moved(Configuration {
            state: action.next,
            tape: config.tape.write_and_shift(action.write, action.dir),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunResult {
    #[serde(rename = "final")]
    pub final_config: Configuration,
    pub steps_taken: u64,
    pub halted: bool,
    pub accepted: bool,
    pub fuel_exhausted: bool,
}

pub fn run(machine: &Machine, input: &[Symbol], fuel: u64) -> Result<RunResult, InputError> {
    run_with(machine, input, fuel, |_, _| {})
}

/// Like [`run`], calling `observe(k, config)` on the initial configuration
/// (`k = 0`) and after every transition.
pub fn run_with(
    machine: &Machine,
    input: &[Symbol],
    fuel: u64,
    mut observe: impl FnMut(u64, &Configuration),
) -> Result<RunResult, InputError> {
    let mut config = initial_config(machine, input)?;
    let mut steps_taken = 0;
    observe(0, &config);
    loop {
        let next = step(machine, &config);
        let StepOutcome::Moved(next) = next else {
            let accepted = machine.is_accepting(config.state);
            return Ok(RunResult {
                final_config: config,
                steps_taken,
                halted: true,
                accepted,
                fuel_exhausted: false,
            });
        };
        if steps_taken == fuel {
            return Ok(RunResult {
                final_config: config,
                steps_taken,
                halted: false,
                accepted: false,
                fuel_exhausted: true,
            });
        }
        config = next;
        steps_taken += 1;
        observe(steps_taken, &config);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn syms(v: &[i64]) -> Vec<Symbol> {
        v.iter().copied().map(Symbol).collect()
    }

    fn tape(v: &[(i64, i64)]) -> Tape {
        v.iter().map(|&(i, s)| (i, Symbol(s))).collect()
    }

    fn machine(delta: Vec<Transition>, accepting: &[i64]) -> Machine {
        let sigma: Vec<i64> = delta
            .iter()
            .flat_map(|t| [t.read.0, t.action.write.0])
            .filter(|&s| s != 0)
            .collect();
        validate(TuringMachine::from_parts(
            delta,
            accepting.iter().copied(),
            sigma,
        ))
        .unwrap()
    }

    #[test]
    fn validate_accepts_well_formed() {
        let tm = TuringMachine {
            states: [StateId(0), StateId(1)].into(),
            accepting: [StateId(1)].into(),
            tape_alphabet: [Symbol(0), Symbol(1)].into(),
            input_alphabet: [Symbol(1)].into(),
            blank: Symbol(0),
            initial: StateId(0),
            delta: vec![Transition::new(0, 1, 1, 1, Direction::R)],
        };
        let m = validate(tm.clone()).unwrap();
        assert_eq!(m.raw(), &tm);
    }

    #[test]
    fn validate_rejects_delta_on_accepting() {
        let tm =
            TuringMachine::from_parts(vec![Transition::new(1, 1, 0, 1, Direction::R)], [1], [1]);
        let err = validate(tm).unwrap_err();
        assert!(err
            .violations
            .contains(&Violation::DeltaOnAccepting(StateId(1))));
        assert!(err.to_string().contains("delta defined on accepting state"));
    }

    #[test]
    fn validate_rejects_duplicate_entries() {
        let tm = TuringMachine::from_parts(
            vec![
                Transition::new(0, 1, 0, 1, Direction::R),
                Transition::new(0, 1, 1, 0, Direction::L),
            ],
            [],
            [1],
        );
        let err = validate(tm).unwrap_err();
        assert_eq!(
            err.violations,
            vec![Violation::Nondeterministic(StateId(0), Symbol(1))]
        );
        assert!(err.to_string().contains("nondeterministic delta"));
    }

    #[test]
    fn validate_reports_every_violation() {
        let mut tm =
            TuringMachine::from_parts(vec![Transition::new(0, 1, 0, 1, Direction::R)], [], [1]);
        tm.input_alphabet.insert(Symbol(0));
        tm.delta.push(Transition::new(0, 9, 0, 1, Direction::R));
        tm.initial = StateId(3);
        let err = validate(tm).unwrap_err();
        assert!(err.violations.contains(&Violation::BlankInInput));
        assert!(err
            .violations
            .contains(&Violation::UnknownSymbol(Symbol(9))));
        assert!(err
            .violations
            .contains(&Violation::InitialNotZero(StateId(3))));
    }

    #[test]
    fn initial_config_lays_out_input() {
        let m = machine(vec![Transition::new(0, 1, 0, 2, Direction::R)], &[]);
        let c = initial_config(&m, &syms(&[1, 1, 2])).unwrap();
        assert_eq!(c.state, StateId(0));
        assert_eq!(c.tape, tape(&[(0, 1), (1, 1), (2, 2)]));
        assert_eq!(c.tape.get(-1), Symbol::BLANK);
        assert_eq!(c.tape.get(3), Symbol::BLANK);
    }

    #[test]
    fn initial_config_errors() {
        let m = machine(vec![Transition::new(0, 1, 0, 1, Direction::R)], &[]);
        assert_eq!(initial_config(&m, &[]), Err(InputError::Empty));
        assert_eq!(
            initial_config(&m, &syms(&[0])),
            Err(InputError::NotInInputAlphabet(Symbol(0)))
        );
        assert_eq!(InputError::Empty.to_string(), "empty input");
    }

    #[test]
    fn step_right_and_left() {
        let m = machine(vec![Transition::new(0, 1, 1, 2, Direction::R)], &[]);
        let c = Configuration {
            state: StateId(0),
            tape: tape(&[(0, 1)]),
        };
        assert_eq!(
            step(&m, &c),
            StepOutcome::Moved(Configuration {
                state: StateId(1),
                tape: tape(&[(-1, 2)])
            })
        );

        let m = machine(vec![Transition::new(0, 1, 1, 2, Direction::L)], &[]);
        let c = Configuration {
            state: StateId(0),
            tape: tape(&[(0, 1), (1, 3)]),
        };
        assert_eq!(
            step(&m, &c),
            StepOutcome::Moved(Configuration {
                state: StateId(1),
                tape: tape(&[(1, 2), (2, 3)])
            })
        );
    }

    #[test]
    fn step_halts_when_undefined() {
        let m = machine(vec![Transition::new(0, 1, 1, 2, Direction::L)], &[]);
        let c = Configuration {
            state: StateId(0),
            tape: tape(&[(0, 2)]),
        };
        assert_eq!(step(&m, &c), StepOutcome::Halted);
    }

    #[test]
    fn run_accepts_after_three_steps() {
        let m = machine(
            vec![
                Transition::new(0, 1, 0, 1, Direction::R),
                Transition::new(0, 0, 1, 0, Direction::R),
            ],
            &[1],
        );
        let r = run(&m, &syms(&[1, 1]), 100).unwrap();
        assert_eq!(r.steps_taken, 3);
        assert!(r.halted && r.accepted && !r.fuel_exhausted);
        assert_eq!(r.final_config.state, StateId(1));
        assert_eq!(r.final_config.tape, tape(&[(-3, 1), (-2, 1)]));
    }

    #[test]
    fn run_exhausts_fuel_on_loop() {
        let m = machine(
            vec![
                Transition::new(0, 0, 0, 0, Direction::R),
                Transition::new(0, 1, 0, 1, Direction::R),
            ],
            &[],
        );
        let r = run(&m, &syms(&[1]), 5).unwrap();
        assert_eq!(r.steps_taken, 5);
        assert!(r.fuel_exhausted && !r.halted && !r.accepted);
    }

    #[test]
    fn run_with_zero_fuel() {
        let m = machine(vec![Transition::new(0, 1, 0, 1, Direction::R)], &[]);
        let r = run(&m, &syms(&[1]), 0).unwrap();
        assert_eq!(r.steps_taken, 0);
        assert!(!r.halted && r.fuel_exhausted);

        let r = run(&m, &syms(&[2]), 0);
        assert!(r.is_err());

        let m = machine(vec![Transition::new(0, 2, 0, 1, Direction::R)], &[]);
        let r = run(&m, &syms(&[1]), 0).unwrap();
        assert!(r.halted && !r.accepted && !r.fuel_exhausted);
    }

    #[test]
    fn explicit_blank_is_not_stored() {
        let a = tape(&[(0, 5)]);
        let b = tape(&[(0, 5), (7, 0)]);
        assert_eq!(a, b);
        assert_eq!(b.support_len(), 1);
    }

    fn arb_tape() -> impl Strategy<Value = Tape> {
        proptest::collection::btree_map(-6i64..6, 0i64..4, 0..8)
            .prop_map(|m| m.into_iter().map(|(i, s)| (i, Symbol(s))).collect())
    }

    proptest! {
        #[test]
        fn shift_matches_case_formula(t in arb_tape(), w in 0i64..4, right in any::<bool>(), q in 0i64..3) {
            let dir = if right { Direction::R } else { Direction::L };
            let read = t.head();
            let m = machine(vec![Transition {
                state: StateId(q),
                read,
                action: Action { next: StateId(q + 1), write: Symbol(w), dir },
            }], &[]);
            let c = Configuration { state: StateId(q), tape: t.clone() };
            let StepOutcome::Moved(next) = step(&m, &c) else { panic!("expected a move") };
            prop_assert_eq!(next.state, StateId(q + 1));
            let lo = t.support().min().unwrap_or(0).min(0) - 2;
            let hi = t.support().max().unwrap_or(0).max(0) + 2;
            for i in lo..=hi {
                let expected = match dir {
                    Direction::R if i == -1 => Symbol(w),
                    Direction::R => t.get(i + 1),
                    Direction::L if i == 1 => Symbol(w),
                    Direction::L => t.get(i - 1),
                };
                prop_assert_eq!(next.tape.get(i), expected, "index {}", i);
            }
            prop_assert!(next.tape.support_len() <= t.support_len() + 1);
            // deterministic
            prop_assert_eq!(step(&m, &c), step(&m, &c));
        }

        #[test]
        fn halted_stays_halted(t in arb_tape()) {
            let m = machine(vec![Transition::new(0, 7, 1, 1, Direction::R)], &[]);
            let c = Configuration { state: StateId(0), tape: t };
            prop_assume!(c.tape.head() != Symbol(7));
            prop_assert_eq!(step(&m, &c), StepOutcome::Halted);
            prop_assert_eq!(step(&m, &c), StepOutcome::Halted);
        }
    }
}
