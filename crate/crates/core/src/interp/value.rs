use std::fmt;
use std::sync::Arc;

/// Index of a struct definition in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StructId(pub u16);

/// Identity of a struct instance. Serial `0` is the nil instance of the type;
/// every other serial comes from one global allocation counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub ty: StructId,
    pub serial: u32,
}

impl Label {
    pub fn nil(ty: StructId) -> Self {
        Label { ty, serial: 0 }
    }

    pub fn is_nil(self) -> bool {
        self.serial == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Ref(Label),
}

impl Value {
    pub fn as_ref_label(self) -> Option<Label> {
        match self {
            Value::Ref(l) => Some(l),
            _ => None,
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            Value::Int(_) => "Int",
            Value::Bool(_) => "Bool",
            Value::Ref(_) => "reference",
        }
    }
}

/// Interned identifier used in commands and environments.
pub type Name = Arc<str>;

/// Renders labels and values with struct names, e.g. `TapeCell#3`.
pub struct Display<'a, T> {
    pub(crate) names: &'a [Name],
    pub(crate) item: T,
}

impl fmt::Display for Display<'_, Label> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}#{}",
            self.names[self.item.ty.0 as usize], self.item.serial
        )
    }
}

impl fmt::Display for Display<'_, Value> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.item {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Ref(l) => Display {
                names: self.names,
                item: l,
            }
            .fmt(f),
        }
    }
}
