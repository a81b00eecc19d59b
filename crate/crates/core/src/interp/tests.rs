use std::sync::Arc;

use super::*;
use crate::lang::{load, BinOp};

const TAPE: &str = "\
struct TapeCell (left: TapeCell, right: TapeCell, symbol: Int) {}
struct Control (head: TapeCell, state: Int, accepting: Bool) {
    noop {}
}
noop
";

fn runtime(src: &str) -> Runtime {
    Runtime::new(load(src).unwrap())
}

struct Fixture {
    rt: Runtime,
    state: GlobalState,
    cell: Label,
    ctl: Label,
}

fn fixture() -> Fixture {
    let rt = runtime(TAPE);
    let mut state = GlobalState::initial(&rt);
    let tc = rt.layouts().id("TapeCell").unwrap();
    let c = rt.layouts().id("Control").unwrap();
    let mut env = rt.default_env(tc).clone();
    env.insert("symbol".into(), Value::Int(1));
    let cell = state.spawn(tc, env);
    let mut env = rt.default_env(c).clone();
    env.insert("head".into(), Value::Ref(cell));
    let ctl = state.spawn(c, env);
    Fixture {
        rt,
        state,
        cell,
        ctl,
    }
}

impl Fixture {
    fn load(&mut self, actor: Label, cmds: Vec<Command>) {
        let inst = self.state.structs.get_mut(&actor).unwrap();
        inst.push_block(cmds.into());
    }

    fn run(&mut self, actor: Label, n: usize) -> AccessTrace {
        let mut trace = AccessTrace::new();
        for _ in 0..n {
            exec_command(&self.rt, &mut self.state, actor, &mut trace).unwrap();
        }
        trace
    }

    fn stack(&self, actor: Label) -> &[Value] {
        &self.state.instance(actor).unwrap().stack
    }
}

#[test]
fn push_this_pushes_own_label() {
    let mut f = fixture();
    let ctl = f.ctl;
    f.load(ctl, vec![Command::PushThis]);
    f.run(ctl, 1);
    assert_eq!(f.stack(ctl), &[Value::Ref(ctl)]);
    assert!(!f.state.instance(ctl).unwrap().is_idle());
}

#[test]
fn path_resolution_grows_stack_by_one() {
    let mut f = fixture();
    let ctl = f.ctl;
    let cmds = interpret_expr(
        &crate::lang::Expression::path(&["head", "symbol"]),
        f.rt.layouts(),
    );
    let n = cmds.len();
    f.load(ctl, cmds);
    let trace = f.run(ctl, n);
    assert_eq!(f.stack(ctl), &[Value::Int(1)]);
    assert_eq!(trace.len(), 2);
    assert!(trace.records.iter().all(|r| r.kind == AccessKind::Read));
}

#[test]
fn nil_parameter_write_is_skipped() {
    let mut f = fixture();
    let ctl = f.ctl;
    let tc = f.rt.layouts().id("TapeCell").unwrap();
    let nil = Label::nil(tc);
    f.load(
        ctl,
        vec![
            Command::Push(Value::Int(7)),
            Command::Push(Value::Ref(nil)),
            Command::Write("symbol".into()),
        ],
    );
    let trace = f.run(ctl, 3);
    assert_eq!(f.state.read(nil, "symbol"), Some(Value::Int(0)));
    assert_eq!(f.state.stability, vec![true]);
    assert_eq!(trace.records[0].kind, AccessKind::WriteSkip);
    assert!(f.state.nil_instances_pristine(&f.rt));
}

#[test]
fn parameter_change_resets_stability() {
    let mut f = fixture();
    let (ctl, cell) = (f.ctl, f.cell);
    f.state.stability = vec![true, true];
    let write = |v| {
        vec![
            Command::Push(Value::Int(v)),
            Command::Push(Value::Ref(cell)),
            Command::Write("symbol".into()),
        ]
    };
    f.load(ctl, write(1));
    f.run(ctl, 3);
    assert_eq!(
        f.state.stability,
        vec![true, true],
        "same value keeps stability"
    );
    f.load(ctl, write(2));
    let trace = f.run(ctl, 3);
    assert_eq!(f.state.read(cell, "symbol"), Some(Value::Int(2)));
    assert_eq!(f.state.stability, vec![false, false]);
    assert_eq!(trace.records[0].old, Value::Int(1));
    assert_eq!(trace.records[0].new, Value::Int(2));
}

#[test]
fn cons_creates_idle_instance_and_resets_stability() {
    let mut f = fixture();
    let ctl = f.ctl;
    let tc = f.rt.layouts().id("TapeCell").unwrap();
    let nil = Value::Ref(Label::nil(tc));
    f.load(
        ctl,
        vec![
            Command::Push(nil),
            Command::Push(nil),
            Command::Push(Value::Int(3)),
            Command::Cons(tc),
        ],
    );
    f.run(ctl, 4);
    let Value::Ref(new) = f.stack(ctl)[0] else {
        panic!("expected a label");
    };
    assert_eq!(f.stack(ctl).len(), 1);
    assert!(!new.is_nil());
    assert!(f.state.instance(new).unwrap().is_idle());
    assert_eq!(f.state.read(new, "symbol"), Some(Value::Int(3)));
    assert_eq!(f.state.stability, vec![false]);
}

#[test]
fn if_true_prepends_false_skips() {
    let mut f = fixture();
    let ctl = f.ctl;
    let block: Arc<[Command]> = vec![Command::Push(Value::Int(9))].into();
    let tail = Command::Push(Value::Int(1));
    f.load(
        ctl,
        vec![
            Command::Push(Value::Bool(true)),
            Command::If(block.clone()),
            tail.clone(),
        ],
    );
    f.run(ctl, 2);
    assert_eq!(
        f.state.instance(ctl).unwrap().command_list(),
        vec![Command::Push(Value::Int(9)), tail.clone()]
    );
    f.run(ctl, 2);

    f.load(
        ctl,
        vec![
            Command::Push(Value::Bool(false)),
            Command::If(block),
            tail.clone(),
        ],
    );
    f.run(ctl, 2);
    assert_eq!(f.state.instance(ctl).unwrap().command_list(), vec![tail]);
}

#[test]
fn operators() {
    let mut f = fixture();
    let ctl = f.ctl;
    f.load(
        ctl,
        vec![
            Command::Push(Value::Int(2)),
            Command::Push(Value::Int(5)),
            Command::Op(BinOp::Sub),
            Command::Push(Value::Int(-3)),
            Command::Op(BinOp::Eq),
            Command::Not,
        ],
    );
    f.run(ctl, 6);
    assert_eq!(f.stack(ctl), &[Value::Bool(false)]);
}

#[test]
fn type_confusion_is_an_error() {
    let mut f = fixture();
    let ctl = f.ctl;
    f.load(ctl, vec![Command::Push(Value::Int(1)), Command::Not]);
    f.run(ctl, 1);
    let mut trace = AccessTrace::new();
    let err = exec_command(&f.rt, &mut f.state, ctl, &mut trace).unwrap_err();
    assert!(matches!(err, ExecError::TypeConfusion { .. }), "{err}");
}

const COUNTER: &str = "\
struct Cell (v: Int) {
    bump { if (v < 3) then { v := v + 1; } }
}
struct Main (c: Cell) {
    init { Main m := Main(Cell(0)); }
}
init < Fix(bump)
";

#[test]
fn fixpoint_runs_until_stable() {
    let rt = runtime(COUNTER);
    for policy in [
        InterleavingPolicy::RoundRobin,
        InterleavingPolicy::SeededRandom(7),
    ] {
        let run = run_program(&rt, policy, 100).unwrap();
        assert!(!run.fuel_exhausted);
        let cell = rt.layouts().id("Cell").unwrap();
        let cells = run.state.non_nil_of(cell);
        assert_eq!(cells.len(), 1);
        assert_eq!(run.state.read(cells[0], "v"), Some(Value::Int(3)));
        // init, three productive bumps, one stable bump
        assert_eq!(run.traces.len(), 5);
        assert_eq!(run.state.stability, vec![false]);
        assert!(is_finished(&rt, &run.state));
    }
}

#[test]
fn fuel_stops_before_the_next_call() {
    let rt = runtime(COUNTER);
    let run = run_program(&rt, InterleavingPolicy::RoundRobin, 1).unwrap();
    assert!(run.fuel_exhausted);
    assert_eq!(run.traces.len(), 1);
    assert_eq!(run.state.pc, 1);
    assert_eq!(run.state.stability, vec![false]);
}

#[test]
fn locals_are_dropped_after_a_step() {
    let rt = runtime(COUNTER);
    let run = run_program(&rt, InterleavingPolicy::RoundRobin, 1).unwrap();
    let main = rt.layouts().id("Main").unwrap();
    let nil = run.state.instance(Label::nil(main)).unwrap();
    assert!(!nil.env.contains_key("m"));
    assert!(run.state.nil_instances_pristine(&rt));
}

#[test]
fn exhaustive_matches_round_robin_on_deterministic_step() {
    let rt = runtime(COUNTER);
    let rr = run_program(&rt, InterleavingPolicy::RoundRobin, 100).unwrap();
    let ex = run_program(&rt, InterleavingPolicy::ExhaustiveBounded(10_000), 100).unwrap();
    assert_eq!(rr.state, ex.state);
}

const RACY: &str = "\
struct Cell (v: Int) {}
struct W (c: Cell, k: Int) {
    init { W a := W(Cell(0), 1); W b := W(a.c, 2); }
    put { c.v := k; }
}
init < put
";

#[test]
fn exhaustive_detects_nondeterminism() {
    let rt = runtime(RACY);
    let mut state = GlobalState::initial(&rt);
    let mut il = Interleaver::new(InterleavingPolicy::RoundRobin);
    exec_step_named(&rt, &mut state, "init", &mut il).unwrap();
    let put = rt.step_id("put").unwrap();
    let ex = explore_step(&rt, &state, put, 10_000).unwrap();
    assert!(ex.complete);
    assert_eq!(ex.terminals.len(), 2);

    let mut il = Interleaver::new(InterleavingPolicy::ExhaustiveBounded(10_000));
    let err = exec_step(&rt, &mut state.clone(), put, &mut il).unwrap_err();
    assert!(matches!(
        err,
        ExecError::Nondeterministic { outcomes: 2, .. }
    ));

    let mut il = Interleaver::new(InterleavingPolicy::ExhaustiveBounded(3));
    let err = exec_step(&rt, &mut state, put, &mut il).unwrap_err();
    assert_eq!(err, ExecError::BoundExhausted { bound: 3 });
}

#[test]
fn exec_step_requires_idle_state() {
    let mut f = fixture();
    let ctl = f.ctl;
    f.load(ctl, vec![Command::PushThis]);
    let id = f.rt.step_id("noop").unwrap();
    let mut il = Interleaver::new(InterleavingPolicy::RoundRobin);
    assert_eq!(
        exec_step(&f.rt, &mut f.state, id, &mut il).unwrap_err(),
        ExecError::NotIdle
    );
}

#[test]
fn trace_dump_format() {
    let mut f = fixture();
    let (ctl, cell) = (f.ctl, f.cell);
    f.load(
        ctl,
        vec![
            Command::Push(Value::Int(0)),
            Command::Push(Value::Ref(cell)),
            Command::Write("symbol".into()),
        ],
    );
    let trace = f.run(ctl, 3);
    assert_eq!(
        trace.dump(f.rt.layouts()),
        "k=2 actor=Control#2 write target=TapeCell#1.symbol old=1 new=0\n"
    );
}
