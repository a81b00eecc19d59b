use std::collections::BTreeMap;
use std::sync::Arc;

use crate::lang::{LoweredProgram, Program, Schedule, TypeRef};

use super::command::{default_value, interpret_body, Command};
use super::value::{Display, Label, Name, StructId, Value};

pub type Env = BTreeMap<Name, Value>;

#[derive(Debug, Clone)]
pub struct StructLayout {
    pub name: Name,
    pub params: Vec<(Name, TypeRef)>,
}

impl StructLayout {
    pub fn has_param(&self, name: &str) -> bool {
        self.params.iter().any(|(p, _)| &**p == name)
    }
}

/// Struct definitions by id, enough to resolve types and defaults.
#[derive(Debug, Clone)]
pub struct Layouts {
    structs: Vec<StructLayout>,
    names: Vec<Name>,
}

impl Layouts {
    pub fn new(program: &Program) -> Self {
        let structs: Vec<StructLayout> = program
            .structs
            .iter()
            .map(|s| StructLayout {
                name: Name::from(s.name.as_str()),
                params: s
                    .params
                    .iter()
                    .map(|p| (Name::from(p.name.as_str()), p.ty.clone()))
                    .collect(),
            })
            .collect();
        let names = structs.iter().map(|s| s.name.clone()).collect();
        Layouts { structs, names }
    }

    pub fn id(&self, name: &str) -> Option<StructId> {
        self.names
            .iter()
            .position(|n| &**n == name)
            .map(|i| StructId(i as u16))
    }

    pub fn get(&self, id: StructId) -> &StructLayout {
        &self.structs[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.structs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structs.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = StructId> {
        (0..self.structs.len()).map(|i| StructId(i as u16))
    }

    /// The environment of a fresh instance: every parameter at its default.
    pub fn default_env(&self, id: StructId) -> Env {
        self.get(id)
            .params
            .iter()
            .map(|(name, ty)| (name.clone(), default_value(ty, self)))
            .collect()
    }

    pub fn label(&self, label: Label) -> Display<'_, Label> {
        Display {
            names: &self.names,
            item: label,
        }
    }

    pub fn value(&self, value: Value) -> Display<'_, Value> {
        Display {
            names: &self.names,
            item: value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StepId(pub usize);

#[derive(Debug, Clone)]
pub struct StepCode {
    pub name: Name,
    pub owner: StructId,
    pub code: Arc<[Command]>,
}

/// Flattened schedule. `Seq` is concatenation; `Fix(body)` is
/// `FixEnter; body; FixEnd { body_start }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    Call(StepId),
    FixEnter,
    FixEnd { body_start: usize },
}

/// A lowered program with every step body translated to commands.
#[derive(Debug, Clone)]
pub struct Runtime {
    program: LoweredProgram,
    layouts: Layouts,
    steps: Vec<StepCode>,
    schedule: Vec<Instr>,
    defaults: Vec<Env>,
}

impl Runtime {
    pub fn new(program: LoweredProgram) -> Self {
        let layouts = Layouts::new(program.program());
        let mut steps = Vec::new();
        for (i, s) in program.program().structs.iter().enumerate() {
            for step in &s.steps {
                steps.push(StepCode {
                    name: Name::from(step.name.as_str()),
                    owner: StructId(i as u16),
                    code: interpret_body(&step.body, &layouts).into(),
                });
            }
        }
        let mut schedule = Vec::new();
        flatten(&program.program().schedule, &steps, &mut schedule);
        let defaults = layouts.ids().map(|id| layouts.default_env(id)).collect();
        Runtime {
            program,
            layouts,
            steps,
            schedule,
            defaults,
        }
    }

    pub fn program(&self) -> &Program {
        self.program.program()
    }

    pub fn layouts(&self) -> &Layouts {
        &self.layouts
    }

    pub fn step_id(&self, name: &str) -> Option<StepId> {
        self.steps.iter().position(|s| &*s.name == name).map(StepId)
    }

    pub fn step(&self, id: StepId) -> &StepCode {
        &self.steps[id.0]
    }

    pub fn schedule(&self) -> &[Instr] {
        &self.schedule
    }

    pub fn default_env(&self, id: StructId) -> &Env {
        &self.defaults[id.0 as usize]
    }
}

fn flatten(sched: &Schedule, steps: &[StepCode], out: &mut Vec<Instr>) {
    match sched {
        Schedule::Call(name) => {
            let id = steps
                .iter()
                .position(|s| &*s.name == name.as_str())
                .expect("lowering checked that scheduled steps exist");
            out.push(Instr::Call(StepId(id)));
        }
        Schedule::Seq(a, b) => {
            flatten(a, steps, out);
            flatten(b, steps, out);
        }
        Schedule::Fix(body) => {
            out.push(Instr::FixEnter);
            let body_start = out.len();
            flatten(body, steps, out);
            out.push(Instr::FixEnd { body_start });
        }
    }
}
