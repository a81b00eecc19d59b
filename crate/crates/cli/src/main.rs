use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use audala_tc::compile::compile;
use audala_tc::conformance::{
    bisimulate, canonicalize, check_determinism, detect_races, extract_config, BisimVerdict,
    DeterminismReport, RaceReport, Verdict,
};
use audala_tc::interp::{
    next_call, peek_next_call, run_next, AccessTrace, ExecError, GlobalState, Interleaver,
    InterleavingPolicy, Layouts, Runtime,
};
use audala_tc::lang::load;
use audala_tc::tm::{parse_input, parse_machine, run_with, validate, Machine, Symbol};

const ACCEPT: u8 = 0;
const REJECT: u8 = 1;
const USAGE: u8 = 2;
const VIOLATION: u8 = 3;
const INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "audala",
    version,
    about = "Turing machines, their AuDaLa encodings, and checks between the two"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Turing machine on the reference simulator.
    TmRun {
        machine: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
        /// Print every configuration, not just the last.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Compile a machine and its input to AuDaLa source.
    Compile {
        machine: PathBuf,
        #[arg(long)]
        input: String,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Interpret an AuDaLa program.
    AdlRun {
        program: PathBuf,
        #[command(flatten)]
        policy: PolicyArgs,
        /// Maximum number of step executions.
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        /// Print the access trace of every step.
        #[arg(long)]
        dump_trace: bool,
    },
    /// Run a machine and its compiled program side by side.
    Bisim {
        machine: PathBuf,
        #[arg(long)]
        input: String,
        /// Maximum number of machine transitions to compare.
        #[arg(long, default_value_t = 100)]
        steps: u64,
        #[command(flatten)]
        policy: PolicyArgs,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check every execution of a step for data races.
    Races {
        program: PathBuf,
        #[arg(long)]
        step: String,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        #[arg(long)]
        json: bool,
    },
    /// Explore every interleaving of the first execution of a step.
    Determinism {
        program: PathBuf,
        #[arg(long)]
        step: String,
        /// Maximum number of distinct states to explore.
        #[arg(long, default_value_t = 1_000_000)]
        bound: usize,
        /// Maximum number of step executions before the step is reached.
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyName {
    Roundrobin,
    Random,
    Exhaustive,
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long, value_enum, default_value = "roundrobin")]
    policy: PolicyName,
    /// Seed for `--policy random`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// State bound for `--policy exhaustive`.
    #[arg(long, default_value_t = 1_000_000)]
    bound: usize,
}

impl PolicyArgs {
    fn policy(&self) -> InterleavingPolicy {
        match self.policy {
            PolicyName::Roundrobin => InterleavingPolicy::RoundRobin,
            PolicyName::Random => InterleavingPolicy::SeededRandom(self.seed),
            PolicyName::Exhaustive => InterleavingPolicy::ExhaustiveBounded(self.bound),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::TmRun {
            machine,
            input,
            fuel,
            trace,
            json,
        } => tm_run(&machine, &input, fuel, trace, json),
        Command::Compile {
            machine,
            input,
            output,
        } => compile_cmd(&machine, &input, output.as_deref()),
        Command::AdlRun {
            program,
            policy,
            fuel,
            dump_trace,
        } => adl_run(&program, policy.policy(), fuel, dump_trace),
        Command::Bisim {
            machine,
            input,
            steps,
            policy,
            report,
        } => bisim(&machine, &input, steps, policy.policy(), report.as_deref()),
        Command::Races {
            program,
            step,
            policy,
            fuel,
            json,
        } => races(&program, &step, policy.policy(), fuel, json),
        Command::Determinism {
            program,
            step,
            bound,
            fuel,
            json,
        } => determinism(&program, &step, bound, fuel, json),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_machine(path: &Path, input: &str) -> Result<(Machine, Vec<Symbol>)> {
    let raw = parse_machine(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let machine = validate(raw).with_context(|| format!("in {}", path.display()))?;
    let input = parse_input(input)?;
    machine.check_input(&input)?;
    Ok((machine, input))
}

fn load_runtime(path: &Path) -> Result<Runtime> {
    let program = load(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    Ok(Runtime::new(program))
}

fn tm_run(path: &Path, input: &str, fuel: u64, trace: bool, json: bool) -> Result<u8> {
    let (machine, input) = load_machine(path, input)?;
    let result = run_with(&machine, &input, fuel, |k, c| {
        if trace && !json {
            println!("{k}: {c}");
        }
    })?;
    if json {
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        println!("final: {}", result.final_config);
        println!(
            "steps={} halted={} accepted={}",
            result.steps_taken, result.halted, result.accepted
        );
    }
    Ok(if result.fuel_exhausted {
        INCONCLUSIVE
    } else if result.accepted {
        ACCEPT
    } else {
        REJECT
    })
}

fn compile_cmd(path: &Path, input: &str, output: Option<&Path>) -> Result<u8> {
    let (machine, input) = load_machine(path, input)?;
    let source = compile(&machine, &input)?.source();
    match output {
        Some(out) => {
            fs::write(out, source).with_context(|| format!("cannot write {}", out.display()))?
        }
        None => print!("{source}"),
    }
    Ok(ACCEPT)
}

/// Exit code for an interpreter error, or `None` if it is a plain failure.
fn exec_code(e: &ExecError) -> Option<u8> {
    match e {
        ExecError::Nondeterministic { .. } => Some(VIOLATION),
        ExecError::BoundExhausted { .. } => Some(INCONCLUSIVE),
        _ => None,
    }
}

fn adl_run(path: &Path, policy: InterleavingPolicy, fuel: usize, dump: bool) -> Result<u8> {
    let rt = load_runtime(path)?;
    let mut state = GlobalState::initial(&rt);
    let mut interleaver = Interleaver::new(policy);
    let mut executed = 0;
    let finished = loop {
        if peek_next_call(&rt, &state).is_none() {
            next_call(&rt, &mut state);
            break true;
        }
        if executed == fuel {
            break false;
        }
        let (id, trace) = match run_next(&rt, &mut state, &mut interleaver) {
            Ok(step) => step.expect("schedule not finished"),
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(exec_code(&e).unwrap_or(USAGE));
            }
        };
        executed += 1;
        if dump {
            println!("# step {} {}", executed, rt.step(id).name);
            print!("{}", trace.dump(rt.layouts()));
        }
    };
    if finished {
        println!("terminated after {executed} steps");
    } else {
        println!("fuel exhausted after {executed} steps");
    }
    let code = match extract_config(&rt, &state) {
        Ok(c) => {
            println!("final: {}", c.config());
            println!("accepting={}", c.accepting);
            if c.accepting {
                ACCEPT
            } else {
                REJECT
            }
        }
        Err(_) => {
            print!("{}", canonicalize(&rt, &state).text);
            ACCEPT
        }
    };
    Ok(if finished { code } else { INCONCLUSIVE })
}

fn bisim(
    path: &Path,
    input: &str,
    steps: u64,
    policy: InterleavingPolicy,
    report_path: Option<&Path>,
) -> Result<u8> {
    let (machine, input) = load_machine(path, input)?;
    let report = match bisimulate(&machine, &input, steps, policy) {
        Ok(r) => r,
        Err(audala_tc::conformance::BisimError::Exec(e)) if exec_code(&e).is_some() => {
            eprintln!("error: {e}");
            return Ok(exec_code(&e).unwrap());
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(out) = report_path {
        fs::write(out, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("cannot write {}", out.display()))?;
    }
    match &report.verdict {
        BisimVerdict::Pass => println!("verdict: pass"),
        BisimVerdict::Fail {
            at_step,
            reason,
            tm,
            implementation,
        } => {
            println!("verdict: fail at step {at_step} ({reason})");
            println!("machine:        {tm}");
            println!("implementation: {}", implementation.config());
        }
    }
    println!(
        "steps={} halted={} halt-agreement={} accept-agreement={}",
        report.steps_compared, report.halted, report.halt_agreement, report.accept_agreement
    );
    Ok(if !report.passed() {
        VIOLATION
    } else if report.window_exhausted {
        println!("window of {steps} steps exhausted before halting");
        INCONCLUSIVE
    } else {
        ACCEPT
    })
}

fn races_json(report: &RaceReport, layouts: &Layouts) -> Json {
    let label = |l| layouts.label(l).to_string();
    json!({
        "races": report.races.iter().map(|r| json!({
            "target": label(r.target),
            "field": &*r.field,
            "actors": [label(r.actors.0), label(r.actors.1)],
            "kind": r.kind.as_str(),
            "writtenValues": r.written_values.iter()
                .map(|v| layouts.value(*v).to_string())
                .collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "advisories": report.advisories.iter().map(|a| json!({
            "target": label(a.target),
            "field": &*a.field,
            "actors": a.actors.iter().map(|l| label(*l)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn print_races(report: &RaceReport, layouts: &Layouts) {
    for r in &report.races {
        let values: Vec<String> = r
            .written_values
            .iter()
            .map(|v| layouts.value(*v).to_string())
            .collect();
        println!(
            "race {} on {}.{} between {} and {}, written {{{}}}",
            r.kind.as_str(),
            layouts.label(r.target),
            r.field,
            layouts.label(r.actors.0),
            layouts.label(r.actors.1),
            values.join(", ")
        );
    }
    for a in &report.advisories {
        let actors: Vec<String> = a
            .actors
            .iter()
            .map(|l| layouts.label(*l).to_string())
            .collect();
        println!(
            "advisory: skipped nil write on {}.{} by {}",
            layouts.label(a.target),
            a.field,
            actors.join(", ")
        );
    }
}

fn races(
    path: &Path,
    step: &str,
    policy: InterleavingPolicy,
    fuel: usize,
    json: bool,
) -> Result<u8> {
    let rt = load_runtime(path)?;
    if rt.step_id(step).is_none() {
        bail!("unknown step `{step}`");
    }
    let mut state = GlobalState::initial(&rt);
    let mut interleaver = Interleaver::new(policy);
    let mut report = RaceReport::default();
    let mut executions = 0;
    for _ in 0..fuel {
        let (id, trace) = match run_next(&rt, &mut state, &mut interleaver) {
            Ok(Some(step)) => step,
            Ok(None) => break,
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(exec_code(&e).unwrap_or(USAGE));
            }
        };
        if &*rt.step(id).name == step {
            executions += 1;
            report.merge(detect_races(&trace));
        }
    }
    if json {
        let mut out = races_json(&report, rt.layouts());
        out["executions"] = json!(executions);
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("{executions} executions of `{step}` checked");
        print_races(&report, rt.layouts());
        println!("{} races", report.races.len());
    }
    Ok(if !report.is_race_free() {
        VIOLATION
    } else if executions == 0 {
        INCONCLUSIVE
    } else {
        ACCEPT
    })
}

fn dump_traces(label: &str, trace: &AccessTrace, layouts: &Layouts) {
    println!("# {label}");
    print!("{}", trace.dump(layouts));
}

fn determinism_json(report: &DeterminismReport, layouts: &Layouts) -> Json {
    json!({
        "verdict": report.verdict.as_str(),
        "digests": report.digests,
        "explored": report.explored,
        "bound": report.bound,
        "divergent": report.divergent.as_ref().map(|(a, b)| [a.dump(layouts), b.dump(layouts)]),
        "races": races_json(&report.races, layouts),
        "raceWithoutDivergence": report.race_without_divergence,
    })
}

fn determinism(path: &Path, step: &str, bound: usize, fuel: usize, json: bool) -> Result<u8> {
    let rt = load_runtime(path)?;
    let Some(target) = rt.step_id(step) else {
        bail!("unknown step `{step}`");
    };
    // Reach the first execution of the step with a fixed interleaving.
    let mut state = GlobalState::initial(&rt);
    let mut interleaver = Interleaver::new(InterleavingPolicy::RoundRobin);
    let mut executed = 0;
    loop {
        match peek_next_call(&rt, &state) {
            Some(id) if id == target => break,
            Some(_) if executed < fuel => {
                run_next(&rt, &mut state, &mut interleaver)?;
                executed += 1;
            }
            _ => {
                println!("step `{step}` not reached");
                return Ok(INCONCLUSIVE);
            }
        }
    }
    next_call(&rt, &mut state);
    let report = check_determinism(&rt, step, &state, bound)?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&determinism_json(&report, rt.layouts()))?
        );
    } else {
        println!("verdict: {}", report.verdict.as_str());
        println!(
            "explored {} states (bound {})",
            report.explored, report.bound
        );
        for d in &report.digests {
            println!("digest {d}");
        }
        if let Some((a, b)) = &report.divergent {
            dump_traces("first outcome", a, rt.layouts());
            dump_traces("second outcome", b, rt.layouts());
        }
        print_races(&report.races, rt.layouts());
        if report.race_without_divergence {
            println!("warning: races found but every interleaving agreed");
        }
    }
    Ok(match report.verdict {
        Verdict::Pass => ACCEPT,
        Verdict::Fail => VIOLATION,
        Verdict::Inconclusive => INCONCLUSIVE,
    })
}
