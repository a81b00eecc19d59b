use std::collections::BTreeMap;

use thiserror::Error;

use crate::interp::{explore_step, AccessTrace, ExecError, GlobalState, Runtime};

use super::canon::canonicalize;
use super::races::{detect_races, RaceReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Every interleaving ends in the same canonical state.
    Pass,
    /// At least two canonical end states.
    Fail,
    /// The bound was hit before every interleaving was covered.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeterminismReport {
    pub verdict: Verdict,
    /// Distinct canonical digests of the end states found, sorted.
    pub digests: Vec<String>,
    /// Distinct states visited.
    pub explored: usize,
    pub bound: usize,
    /// Traces leading to the first two distinct end states, on failure.
    pub divergent: Option<(AccessTrace, AccessTrace)>,
    /// Races over the union of all explored accesses.
    pub races: RaceReport,
    /// Set when the step raced yet still passed. Races are expected to be
    /// the only source of nondeterminism, so such a result merits a look.
    pub race_without_divergence: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeterminismError {
    #[error("unknown step `{0}`")]
    UnknownStep(String),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// Explores every interleaving of `step` from `start`, visiting at most
/// `bound` states.
pub fn check_determinism(
    rt: &Runtime,
    step: &str,
    start: &GlobalState,
    bound: usize,
) -> Result<DeterminismReport, DeterminismError> {
    let id = rt
        .step_id(step)
        .ok_or_else(|| DeterminismError::UnknownStep(step.to_string()))?;
    let exploration = explore_step(rt, start, id, bound)?;
    let mut by_digest: BTreeMap<String, AccessTrace> = BTreeMap::new();
    let mut first_two: Vec<AccessTrace> = Vec::new();
    for t in exploration.terminals {
        let digest = canonicalize(rt, &t.state).digest;
        if let std::collections::btree_map::Entry::Vacant(slot) = by_digest.entry(digest) {
            if first_two.len() < 2 {
                first_two.push(t.trace.clone());
            }
            slot.insert(t.trace);
        }
    }
    let races = detect_races(&exploration.accesses);
    let verdict = if !exploration.complete {
        Verdict::Inconclusive
    } else if by_digest.len() == 1 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let divergent = match (verdict, first_two.len()) {
        (Verdict::Fail, 2) => {
            let b = first_two.pop().unwrap();
            let a = first_two.pop().unwrap();
            Some((a, b))
        }
        _ => None,
    };
    Ok(DeterminismReport {
        race_without_divergence: verdict == Verdict::Pass && !races.is_race_free(),
        verdict,
        digests: by_digest.into_keys().collect(),
        explored: exploration.explored,
        bound,
        divergent,
        races,
    })
}
