use std::fmt::Write;

use super::runtime::Layouts;
use super::value::{Label, Name, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AccessKind {
    Read,
    Write,
    /// A write to a nil instance's parameter; it changed nothing.
    WriteSkip,
}

impl AccessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AccessKind::Read => "read",
            AccessKind::Write => "write",
            AccessKind::WriteSkip => "write-skip",
        }
    }
}

/// One access to a struct parameter. Local variables are not recorded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AccessRecord {
    /// Index of the command within the step execution.
    pub index: u64,
    pub actor: Label,
    pub target: Label,
    pub field: Name,
    pub kind: AccessKind,
    pub old: Value,
    pub new: Value,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessTrace {
    pub records: Vec<AccessRecord>,
    /// Commands executed so far in this step.
    pub commands: u64,
}

impl AccessTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// One line per record:
    /// `k=3 actor=Control#1 write target=TapeCell#2.symbol old=0 new=1`.
    pub fn dump(&self, layouts: &Layouts) -> String {
        let mut out = String::new();
        for r in &self.records {
            writeln!(
                out,
                "k={} actor={} {} target={}.{} old={} new={}",
                r.index,
                layouts.label(r.actor),
                r.kind.as_str(),
                layouts.label(r.target),
                r.field,
                layouts.value(r.old),
                layouts.value(r.new),
            )
            .unwrap();
        }
        out
    }
}
