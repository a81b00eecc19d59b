//! Line-oriented machine files.
//!
//! ```text
//! # comment
//! accept: 1
//! input-alphabet: 1 2
//! delta: 0 1 -> 0 1 R
//! delta: 0 0 -> 1 0 R
//! ```
//!
//! `accept:` is required (the list may be empty). Without `input-alphabet:`
//! the input alphabet is every nonzero symbol that appears in `delta`.

use thiserror::Error;

use super::{Direction, Symbol, Transition, TuringMachine};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `accept:` line")]
    MissingAccept,
    #[error("line {line}: duplicate `{key}:` line")]
    Duplicate { line: usize, key: &'static str },
    #[error("bad input string: {0}")]
    Input(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn ints(line: usize, tokens: &str) -> Result<Vec<i64>, FormatError> {
    tokens
        .split_whitespace()
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| syntax(line, format!("expected integer, found `{t}`")))
        })
        .collect()
}

fn parse_delta(line: usize, rest: &str) -> Result<Transition, FormatError> {
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    let [q, s, "->", q2, s2, d] = tokens.as_slice() else {
        return Err(syntax(line, "expected `delta: <q> <s> -> <q'> <s'> <L|R>`"));
    };
    let num = |t: &str| {
        t.parse::<i64>()
            .map_err(|_| syntax(line, format!("expected integer, found `{t}`")))
    };
    let dir = match *d {
        "L" => Direction::L,
        "R" => Direction::R,
        other => return Err(syntax(line, format!("expected L or R, found `{other}`"))),
    };
    Ok(Transition::new(num(q)?, num(s)?, num(q2)?, num(s2)?, dir))
}

/// Parses a machine file. The result still has to go through
/// [`validate`](super::validate).
pub fn parse_machine(text: &str) -> Result<TuringMachine, FormatError> {
    let mut accept = None;
    let mut sigma = None;
    let mut delta = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, rest)) = content.split_once(':') else {
            return Err(syntax(
                line,
                format!("expected `key: ...`, found `{content}`"),
            ));
        };
        match key.trim() {
            "accept" => {
                if accept.is_some() {
                    return Err(FormatError::Duplicate {
                        line,
                        key: "accept",
                    });
                }
                accept = Some(ints(line, rest)?);
            }
            "input-alphabet" => {
                if sigma.is_some() {
                    return Err(FormatError::Duplicate {
                        line,
                        key: "input-alphabet",
                    });
                }
                sigma = Some(ints(line, rest)?);
            }
            "delta" => delta.push(parse_delta(line, rest)?),
            other => return Err(syntax(line, format!("unknown key `{other}`"))),
        }
    }
    let accept = accept.ok_or(FormatError::MissingAccept)?;
    let sigma = sigma.unwrap_or_else(|| {
        delta
            .iter()
            .flat_map(|t| [t.read.0, t.action.write.0])
            .filter(|&s| s != 0)
            .collect()
    });
    Ok(TuringMachine::from_parts(delta, accept, sigma))
}

/// Parses a whitespace-separated input string such as `"1 1 2"`.
pub fn parse_input(text: &str) -> Result<Vec<Symbol>, FormatError> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<i64>()
                .map(Symbol)
                .map_err(|_| FormatError::Input(format!("expected integer, found `{t}`")))
        })
        .collect()
}
