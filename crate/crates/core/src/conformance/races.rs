//! Data race detection over the accesses of one step execution.

use std::collections::{BTreeMap, BTreeSet};

use crate::interp::{AccessKind, AccessRecord, AccessTrace, Label, Name, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RaceKind {
    ReadWrite,
    WriteWrite,
}

impl RaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RaceKind::ReadWrite => "read-write",
            RaceKind::WriteWrite => "write-write",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Race {
    pub target: Label,
    pub field: Name,
    /// Two distinct actors, the first of which wrote.
    pub actors: (Label, Label),
    pub kind: RaceKind,
    /// Values stored by the non-skipped writes.
    pub written_values: BTreeSet<Value>,
}

/// Several actors touched a nil instance's parameter and at least one tried
/// to write it. The write changed nothing, so this is not a race.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advisory {
    pub target: Label,
    pub field: Name,
    pub actors: BTreeSet<Label>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RaceReport {
    pub races: Vec<Race>,
    pub advisories: Vec<Advisory>,
}

impl RaceReport {
    pub fn is_race_free(&self) -> bool {
        self.races.is_empty()
    }

    pub fn write_write(&self) -> usize {
        self.races
            .iter()
            .filter(|r| r.kind == RaceKind::WriteWrite)
            .count()
    }

    pub fn merge(&mut self, other: RaceReport) {
        self.races.extend(other.races);
        self.advisories.extend(other.advisories);
    }
}

/// Groups the accesses by `(target, field)` and reports every group that two
/// or more actors touched with at least one real write among them.
pub fn detect_races(trace: &AccessTrace) -> RaceReport {
    let mut groups: BTreeMap<(Label, &Name), Vec<&AccessRecord>> = BTreeMap::new();
    for r in &trace.records {
        groups.entry((r.target, &r.field)).or_default().push(r);
    }
    let mut report = RaceReport::default();
    for ((target, field), records) in groups {
        let actors: BTreeSet<Label> = records.iter().map(|r| r.actor).collect();
        if actors.len() < 2 {
            continue;
        }
        let mut writers: Vec<Label> = Vec::new();
        let mut written_values = BTreeSet::new();
        let mut skipped = false;
        for r in &records {
            match r.kind {
                AccessKind::Write => {
                    if !writers.contains(&r.actor) {
                        writers.push(r.actor);
                    }
                    written_values.insert(r.new);
                }
                AccessKind::WriteSkip => skipped = true,
                AccessKind::Read => {}
            }
        }
        if let Some(&first) = writers.first() {
            let (other, kind) = match writers.get(1) {
                Some(&second) => (second, RaceKind::WriteWrite),
                None => (
                    *actors.iter().find(|a| **a != first).expect("two actors"),
                    RaceKind::ReadWrite,
                ),
            };
            report.races.push(Race {
                target,
                field: field.clone(),
                actors: (first, other),
                kind,
                written_values,
            });
        } else if skipped {
            report.advisories.push(Advisory {
                target,
                field: field.clone(),
                actors,
            });
        }
    }
    report
}
