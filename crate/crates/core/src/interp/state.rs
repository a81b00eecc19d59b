use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::command::Command;
use super::runtime::{Env, Runtime};
use super::value::{Label, StructId, Value};

/// A position inside a command block. Blocks are shared with the runtime,
/// so frames compare by block identity.
#[derive(Debug, Clone)]
pub struct Frame {
    code: Arc<[Command]>,
    at: usize,
}

impl Frame {
    pub fn new(code: Arc<[Command]>) -> Self {
        Frame { code, at: 0 }
    }

    pub fn remaining(&self) -> &[Command] {
        &self.code[self.at..]
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.code, &other.code) && self.at == other.at
    }
}

impl Eq for Frame {}

impl Hash for Frame {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.code.as_ptr() as usize).hash(state);
        self.at.hash(state);
    }
}

/// `<type, command list, stack, environment>`. The command list is a stack of
/// frames; the top frame runs first, and no frame is ever exhausted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub ty: StructId,
    pub frames: Vec<Frame>,
    pub stack: Vec<Value>,
    pub env: Env,
}

impl Instance {
    pub fn new(ty: StructId, env: Env) -> Self {
        Instance {
            ty,
            frames: Vec::new(),
            stack: Vec::new(),
            env,
        }
    }

    pub fn has_commands(&self) -> bool {
        !self.frames.is_empty()
    }

    pub fn is_idle(&self) -> bool {
        self.frames.is_empty() && self.stack.is_empty()
    }

    pub fn next_command(&self) -> Option<&Command> {
        self.frames.last().map(|f| &f.code[f.at])
    }

    /// The whole pending command list, in execution order.
    pub fn command_list(&self) -> Vec<Command> {
        self.frames
            .iter()
            .rev()
            .flat_map(|f| f.remaining().iter().cloned())
            .collect()
    }

    /// Schedules `code` to run before the rest of the command list.
    pub fn push_block(&mut self, code: Arc<[Command]>) {
        if !code.is_empty() {
            self.frames.push(Frame::new(code));
        }
    }

    /// Removes and returns the next command.
    pub(crate) fn take_command(&mut self) -> Option<Command> {
        let frame = self.frames.last_mut()?;
        let cmd = frame.code[frame.at].clone();
        frame.at += 1;
        if frame.at == frame.code.len() {
            self.frames.pop();
        }
        Some(cmd)
    }
}

/// `<schedule cursor, instances, stability stack>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalState {
    /// Index into [`Runtime::schedule`].
    pub pc: usize,
    pub structs: BTreeMap<Label, Instance>,
    pub stability: Vec<bool>,
    pub(crate) next_serial: u32,
}

impl GlobalState {
    /// Only the nil instance of every struct, cursor at the start, and a
    /// single program-level stability flag.
    pub fn initial(rt: &Runtime) -> Self {
        let structs = rt
            .layouts()
            .ids()
            .map(|id| {
                (
                    Label::nil(id),
                    Instance::new(id, rt.default_env(id).clone()),
                )
            })
            .collect();
        GlobalState {
            pc: 0,
            structs,
            stability: vec![true],
            next_serial: 1,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.structs.values().all(Instance::is_idle)
    }

    pub fn instance(&self, label: Label) -> Option<&Instance> {
        self.structs.get(&label)
    }

    pub fn instances_of(&self, ty: StructId) -> impl Iterator<Item = (Label, &Instance)> {
        self.structs
            .range(
                Label::nil(ty)..=Label {
                    ty,
                    serial: u32::MAX,
                },
            )
            .map(|(l, i)| (*l, i))
    }

    pub fn non_nil_of(&self, ty: StructId) -> Vec<Label> {
        self.instances_of(ty)
            .map(|(l, _)| l)
            .filter(|l| !l.is_nil())
            .collect()
    }

    /// Instances that still have commands to run, in label order.
    pub fn active(&self) -> Vec<Label> {
        self.structs
            .iter()
            .filter(|(_, i)| i.has_commands())
            .map(|(l, _)| *l)
            .collect()
    }

    pub fn read(&self, label: Label, field: &str) -> Option<Value> {
        self.structs.get(&label)?.env.get(field).copied()
    }

    pub fn reset_stability(&mut self) {
        self.stability.iter_mut().for_each(|f| *f = false);
    }

    /// True iff every nil instance still has its default environment.
    pub fn nil_instances_pristine(&self, rt: &Runtime) -> bool {
        rt.layouts().ids().all(|id| {
            self.structs
                .get(&Label::nil(id))
                .is_some_and(|i| &i.env == rt.default_env(id))
        })
    }

    /// Adds an idle instance with the given environment, as a constructor
    /// would, without touching stability.
    pub fn spawn(&mut self, ty: StructId, env: Env) -> Label {
        let label = self.allocate(ty);
        self.structs.insert(label, Instance::new(ty, env));
        label
    }

    pub(crate) fn allocate(&mut self, ty: StructId) -> Label {
        let label = Label {
            ty,
            serial: self.next_serial,
        };
        self.next_serial += 1;
        label
    }
}
