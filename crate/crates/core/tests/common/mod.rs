#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use audala_tc::tm::{validate, Direction, Machine, Symbol, Transition, TuringMachine};

pub const CORPUS_SIZE: u64 = 200;

/// A machine with at most 6 states, at most 4 symbols and at most 12 delta
/// entries, plus an input of length 1 to 8. Equal seeds give equal cases.
pub fn random_case(seed: u64) -> (Machine, Vec<Symbol>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: i64 = rng.gen_range(1..=6);
    let symbols: i64 = rng.gen_range(2..=4);
    let accepting: Vec<i64> = (0..states).filter(|_| rng.gen_bool(0.3)).collect();
    let mut pairs: Vec<(i64, i64)> = (0..states)
        .filter(|q| !accepting.contains(q))
        .flat_map(|q| (0..symbols).map(move |s| (q, s)))
        .collect();
    pairs.shuffle(&mut rng);
    let entries = rng.gen_range(0..=pairs.len().min(12));
    let delta = pairs[..entries]
        .iter()
        .map(|&(q, s)| {
            let dir = if rng.gen_bool(0.5) {
                Direction::L
            } else {
                Direction::R
            };
            Transition::new(
                q,
                s,
                rng.gen_range(0..states),
                rng.gen_range(0..symbols),
                dir,
            )
        })
        .collect();
    let sigma: Vec<i64> = (1..symbols).collect();
    let raw = TuringMachine::from_parts(delta, accepting, sigma.clone());
    let machine = validate(raw).expect("generated machines are valid");
    let len = rng.gen_range(1..=8);
    let input = (0..len)
        .map(|_| Symbol(*sigma.choose(&mut rng).unwrap()))
        .collect();
    (machine, input)
}

pub fn machine(delta: Vec<Transition>, accepting: Vec<i64>, sigma: Vec<i64>) -> Machine {
    validate(TuringMachine::from_parts(delta, accepting, sigma)).unwrap()
}

pub fn symbols(v: &[i64]) -> Vec<Symbol> {
    v.iter().copied().map(Symbol).collect()
}

pub fn repo_file(rel: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Moves left on a 1 into a fresh cell, then accepts.
pub fn left_growth() -> (Machine, Vec<Symbol>) {
    (
        machine(
            vec![Transition::new(0, 1, 1, 1, Direction::L)],
            vec![1],
            vec![1],
        ),
        symbols(&[1]),
    )
}

/// Writes 2 and moves right off the end of the input.
pub fn right_growth() -> (Machine, Vec<Symbol>) {
    (
        machine(
            vec![Transition::new(0, 1, 1, 2, Direction::R)],
            vec![],
            vec![1],
        ),
        symbols(&[1]),
    )
}

/// No transitions at all.
pub fn immediate_halt() -> (Machine, Vec<Symbol>) {
    (machine(vec![], vec![], vec![1]), symbols(&[1]))
}
