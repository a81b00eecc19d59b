use std::fmt;

use serde::Serialize;

pub type Ident = String;

/// Source position of a parsed item. Positions never take part in equality,
/// so a re-parsed tree compares equal to the one it was printed from.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl std::hash::Hash for Pos {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub structs: Vec<StructDef>,
    pub schedule: Schedule,
}

impl Program {
    pub fn struct_def(&self, name: &str) -> Option<&StructDef> {
        self.structs.iter().find(|s| s.name == name)
    }

    /// The struct that defines step `name`, with the step itself.
    pub fn find_step(&self, name: &str) -> Option<(&StructDef, &Step)> {
        self.structs
            .iter()
            .find_map(|s| s.steps.iter().find(|st| st.name == name).map(|st| (s, st)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructDef {
    pub name: Ident,
    pub params: Vec<Param>,
    pub steps: Vec<Step>,
    pub pos: Pos,
}

impl StructDef {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: Ident,
    pub ty: TypeRef,
}

impl Param {
    pub fn new(name: &str, ty: TypeRef) -> Self {
        Param {
            name: name.to_string(),
            ty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum TypeRef {
    Int,
    Bool,
    Struct(Ident),
}

impl TypeRef {
    pub fn named(name: &str) -> Self {
        TypeRef::Struct(name.to_string())
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Int => f.write_str("Int"),
            TypeRef::Bool => f.write_str("Bool"),
            TypeRef::Struct(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub name: Ident,
    pub body: Vec<Statement>,
    pub pos: Pos,
}

impl Step {
    pub fn new(name: &str, body: Vec<Statement>) -> Self {
        Step {
            name: name.to_string(),
            body,
            pos: Pos::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    /// `T name := expr;`
    Declare {
        ty: TypeRef,
        name: Ident,
        expr: Expression,
    },
    /// `name := expr;` where `name` is a local or a parameter of `this`.
    Assign { name: Ident, expr: Expression },
    /// `p1. ... .pn.field := expr;` with `n >= 1`.
    Update {
        path: Vec<Ident>,
        field: Ident,
        expr: Expression,
    },
    IfThen {
        cond: Expression,
        body: Vec<Statement>,
    },
    /// Surface only; removed by lowering.
    IfThenElse {
        cond: Expression,
        then_body: Vec<Statement>,
        else_body: Vec<Statement>,
    },
    /// A constructor call whose result is discarded.
    Expr(Expression),
}

impl Statement {
    pub fn declare(ty: TypeRef, name: &str, expr: Expression) -> Self {
        Statement::Declare {
            ty,
            name: name.to_string(),
            expr,
        }
    }

    pub fn assign(name: &str, expr: Expression) -> Self {
        Statement::Assign {
            name: name.to_string(),
            expr,
        }
    }

    /// `update(&["head"], "symbol", e)` is `head.symbol := e;`.
    pub fn update(path: &[&str], field: &str, expr: Expression) -> Self {
        assert!(!path.is_empty(), "update path must be nonempty");
        Statement::Update {
            path: path.iter().map(|s| s.to_string()).collect(),
            field: field.to_string(),
            expr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Eq,
    Ne,
    And,
    Or,
    Add,
    Sub,
    Lt,
    Le,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
        }
    }

    /// Binding strength; higher binds tighter. All binary operators are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le => 4,
            BinOp::Add | BinOp::Sub => 5,
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expression {
    This,
    /// `null`; lowering fills in the type the context expects.
    Null(Option<TypeRef>),
    Int(i64),
    Bool(bool),
    Path(Vec<Ident>),
    Cons {
        name: Ident,
        args: Vec<Expression>,
    },
    Not(Box<Expression>),
    Paren(Box<Expression>),
    BinOp {
        op: BinOp,
        lhs: Box<Expression>,
        rhs: Box<Expression>,
    },
}

const UNARY_PRECEDENCE: u8 = 6;

impl Expression {
    pub fn path(ids: &[&str]) -> Self {
        assert!(!ids.is_empty(), "path must be nonempty");
        Expression::Path(ids.iter().map(|s| s.to_string()).collect())
    }

    pub fn null() -> Self {
        Expression::Null(None)
    }

    pub fn cons(name: &str, args: Vec<Expression>) -> Self {
        Expression::Cons {
            name: name.to_string(),
            args,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::BinOp { op, .. } => op.precedence(),
            _ => UNARY_PRECEDENCE,
        }
    }

    /// Builds `lhs op rhs`, inserting `Paren` nodes where the printed form
    /// would otherwise re-parse differently.
    pub fn binop(op: BinOp, lhs: Expression, rhs: Expression) -> Self {
        let lhs = if lhs.precedence() < op.precedence() {
            Expression::Paren(Box::new(lhs))
        } else {
            lhs
        };
        let rhs = if rhs.precedence() <= op.precedence() {
            Expression::Paren(Box::new(rhs))
        } else {
            rhs
        };
        Expression::BinOp {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Builds `!e`, parenthesizing binary operands.
    pub fn negate(e: Expression) -> Self {
        let e = if e.precedence() < UNARY_PRECEDENCE {
            Expression::Paren(Box::new(e))
        } else {
            e
        };
        Expression::Not(Box::new(e))
    }

    pub fn and(lhs: Expression, rhs: Expression) -> Self {
        Self::binop(BinOp::And, lhs, rhs)
    }

    pub fn eq(lhs: Expression, rhs: Expression) -> Self {
        Self::binop(BinOp::Eq, lhs, rhs)
    }

    pub fn ne(lhs: Expression, rhs: Expression) -> Self {
        Self::binop(BinOp::Ne, lhs, rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    Call(Ident),
    Seq(Box<Schedule>, Box<Schedule>),
    Fix(Box<Schedule>),
}

impl Schedule {
    pub fn call(name: &str) -> Self {
        Schedule::Call(name.to_string())
    }

    pub fn seq(first: Schedule, second: Schedule) -> Self {
        Schedule::Seq(Box::new(first), Box::new(second))
    }

    pub fn fix(body: Schedule) -> Self {
        Schedule::Fix(Box::new(body))
    }

    pub fn step_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Schedule::Call(name) => out.push(name),
            Schedule::Seq(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Schedule::Fix(body) => body.collect_names(out),
        }
    }
}
