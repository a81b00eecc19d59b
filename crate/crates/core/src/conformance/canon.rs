//! Label-independent view of a state.
//!
//! Allocation serials depend on the interleaving, so two runs can build the
//! same heap under different labels. Renumbering non-nil instances by a
//! traversal that only looks at structure makes such states compare equal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;

use sha2::{Digest, Sha256};

use crate::interp::{GlobalState, Label, Runtime, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalState {
    /// Original label to canonical label. Nil labels map to themselves.
    pub renaming: BTreeMap<Label, Label>,
    /// Relabeled state, one line per instance.
    pub text: String,
    /// Hex SHA-256 of `text`.
    pub digest: String,
}

/// Renumbers non-nil labels per struct type, starting at 1, in order of
/// first reachability by breadth-first search from the nil instances. When
/// the search runs dry with instances left, it restarts from an unnumbered
/// instance that nothing else references (or, failing that, the earliest
/// allocated one).
pub fn canonicalize(rt: &Runtime, state: &GlobalState) -> CanonicalState {
    let layouts = rt.layouts();
    let refs = |l: &Label| -> Vec<Label> {
        let inst = &state.structs[l];
        layouts
            .get(inst.ty)
            .params
            .iter()
            .filter_map(|(name, _)| inst.env.get(name).and_then(|v| v.as_ref_label()))
            .filter(|r| !r.is_nil() && state.structs.contains_key(r))
            .collect()
    };

    let mut in_degree: BTreeMap<Label, usize> = BTreeMap::new();
    for l in state.structs.keys() {
        for r in refs(l) {
            *in_degree.entry(r).or_default() += 1;
        }
    }

    let mut renaming: BTreeMap<Label, Label> = BTreeMap::new();
    let mut counters: BTreeMap<_, u32> = BTreeMap::new();
    let mut unnumbered: BTreeSet<Label> = state
        .structs
        .keys()
        .copied()
        .filter(|l| !l.is_nil())
        .collect();
    let mut queue: VecDeque<Label> = layouts.ids().map(Label::nil).collect();
    for l in &queue {
        renaming.insert(*l, *l);
    }

    let mut number = |l: Label, renaming: &mut BTreeMap<Label, Label>| {
        let n = counters.entry(l.ty).or_insert(0);
        *n += 1;
        renaming.insert(
            l,
            Label {
                ty: l.ty,
                serial: *n,
            },
        );
    };

    loop {
        while let Some(l) = queue.pop_front() {
            for r in refs(&l) {
                if unnumbered.remove(&r) {
                    number(r, &mut renaming);
                    queue.push_back(r);
                }
            }
        }
        let Some(root) = unnumbered
            .iter()
            .copied()
            .min_by_key(|l| (in_degree.get(l).copied().unwrap_or(0) > 0, l.serial))
        else {
            break;
        };
        unnumbered.remove(&root);
        number(root, &mut renaming);
        queue.push_back(root);
    }

    let rename = |v: Value| match v {
        Value::Ref(l) => Value::Ref(renaming.get(&l).copied().unwrap_or(l)),
        v => v,
    };
    let mut text = String::new();
    let stability: String = state
        .stability
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    writeln!(text, "pc={} stability={}", state.pc, stability).unwrap();
    let by_canonical: BTreeMap<Label, Label> = renaming.iter().map(|(o, c)| (*c, *o)).collect();
    for (canon, orig) in &by_canonical {
        let inst = &state.structs[orig];
        write!(text, "{}", layouts.label(*canon)).unwrap();
        for (name, value) in &inst.env {
            write!(text, " {}={}", name, layouts.value(rename(*value))).unwrap();
        }
        if !inst.is_idle() {
            write!(text, " busy").unwrap();
        }
        text.push('\n');
    }
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    CanonicalState {
        renaming,
        text,
        digest,
    }
}
