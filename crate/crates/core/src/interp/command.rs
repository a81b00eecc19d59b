//! The interpretation function: statements and expressions to command lists.

use std::sync::Arc;

use crate::lang::{BinOp, Expression, Statement, TypeRef};

use super::runtime::Layouts;
use super::value::{Name, StructId, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Command {
    PushThis,
    Push(Value),
    /// Pop a label, push the value of its `name` entry.
    Read(Name),
    /// Pop a target label (top), then a value; store the value.
    Write(Name),
    /// Pop one value per parameter and push the label of a new instance.
    Cons(StructId),
    Not,
    Op(BinOp),
    /// Pop a boolean; if true, run the block before the rest of the list.
    If(Arc<[Command]>),
    /// Drop the top of the stack (result of a constructor statement).
    Discard,
}

pub fn default_value(ty: &TypeRef, layouts: &Layouts) -> Value {
    match ty {
        TypeRef::Int => Value::Int(0),
        TypeRef::Bool => Value::Bool(false),
        TypeRef::Struct(name) => Value::Ref(crate::interp::Label::nil(
            layouts
                .id(name)
                .unwrap_or_else(|| panic!("unresolved struct type `{name}`")),
        )),
    }
}

pub fn interpret_expr(expr: &Expression, layouts: &Layouts) -> Vec<Command> {
    let mut out = Vec::new();
    emit_expr(expr, layouts, &mut out);
    out
}

fn emit_expr(expr: &Expression, layouts: &Layouts, out: &mut Vec<Command>) {
    match expr {
        Expression::This => out.push(Command::PushThis),
        Expression::Null(ty) => {
            let ty = ty.as_ref().expect("lowered programs annotate every null");
            out.push(Command::Push(default_value(ty, layouts)));
        }
        Expression::Int(v) => out.push(Command::Push(Value::Int(*v))),
        Expression::Bool(b) => out.push(Command::Push(Value::Bool(*b))),
        Expression::Path(ids) => {
            out.push(Command::PushThis);
            out.extend(ids.iter().map(|id| Command::Read(Name::from(id.as_str()))));
        }
        Expression::Cons { name, args } => {
            for a in args {
                emit_expr(a, layouts, out);
            }
            let id = layouts
                .id(name)
                .unwrap_or_else(|| panic!("unresolved struct type `{name}`"));
            out.push(Command::Cons(id));
        }
        Expression::Not(inner) => {
            emit_expr(inner, layouts, out);
            out.push(Command::Not);
        }
        Expression::Paren(inner) => emit_expr(inner, layouts, out),
        Expression::BinOp { op, lhs, rhs } => {
            emit_expr(lhs, layouts, out);
            emit_expr(rhs, layouts, out);
            out.push(Command::Op(*op));
        }
    }
}

pub fn interpret_stmt(stmt: &Statement, layouts: &Layouts) -> Vec<Command> {
    let mut out = Vec::new();
    emit_stmt(stmt, layouts, &mut out);
    out
}

/// Commands for a whole statement list.
pub fn interpret_body(body: &[Statement], layouts: &Layouts) -> Vec<Command> {
    let mut out = Vec::new();
    for s in body {
        emit_stmt(s, layouts, &mut out);
    }
    out
}

fn emit_stmt(stmt: &Statement, layouts: &Layouts, out: &mut Vec<Command>) {
    match stmt {
        // [[T a := E]] = [[a := E]] = [[E]]; push this; write a
        Statement::Declare { name, expr, .. } | Statement::Assign { name, expr } => {
            emit_expr(expr, layouts, out);
            out.push(Command::PushThis);
            out.push(Command::Write(Name::from(name.as_str())));
        }
        // [[A.a := E]] = [[E]]; [[A]]; write a
        Statement::Update { path, field, expr } => {
            emit_expr(expr, layouts, out);
            out.push(Command::PushThis);
            out.extend(path.iter().map(|id| Command::Read(Name::from(id.as_str()))));
            out.push(Command::Write(Name::from(field.as_str())));
        }
        Statement::IfThen { cond, body } => {
            emit_expr(cond, layouts, out);
            out.push(Command::If(interpret_body(body, layouts).into()));
        }
        Statement::IfThenElse { .. } => {
            unreachable!("if-then-else is removed by lowering")
        }
        Statement::Expr(expr) => {
            emit_expr(expr, layouts, out);
            out.push(Command::Discard);
        }
    }
}
