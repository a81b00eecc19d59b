//! Lowering: else-chain desugaring, name resolution, `null` typing and type
//! checking. The output contains only the core statement forms.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use super::ast::*;

/// Identifiers introduced by lowering start with this prefix.
pub const FLAG_PREFIX: &str = "__";

/// A program that passed [`lower`]: no `IfThenElse`, every `null` carries a
/// type, every name resolves, every statement is well typed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoweredProgram(Program);

impl LoweredProgram {
    pub fn program(&self) -> &Program {
        &self.0
    }

    pub fn into_program(self) -> Program {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{location}: {kind}")]
pub struct LowerError {
    pub location: String,
    pub kind: LowerErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerErrorKind {
    #[error("duplicate struct `{0}`")]
    DuplicateStruct(Ident),
    #[error("duplicate parameter `{0}`")]
    DuplicateParam(Ident),
    #[error("step `{0}` is defined more than once")]
    DuplicateStep(Ident),
    #[error("unknown type `{0}`")]
    UnknownType(Ident),
    #[error("schedule calls undefined step `{0}`")]
    UnboundStep(Ident),
    #[error("unresolved name `{0}`")]
    UnresolvedName(Ident),
    #[error("`{0}` is already declared")]
    Redeclared(Ident),
    #[error("type `{ty}` has no parameter `{field}`")]
    NoSuchField { ty: TypeRef, field: Ident },
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: TypeRef, found: TypeRef },
    #[error("operator `{op}` is not defined on {ty}")]
    BadOperand { op: BinOp, ty: TypeRef },
    #[error("`null` in a context with no determinable type")]
    UntypedNull,
    #[error("constructor `{name}` takes {expected} arguments, found {found}")]
    Arity {
        name: Ident,
        expected: usize,
        found: usize,
    },
    #[error("only constructor calls may be used as statements")]
    NotAConstructor,
}

struct Location<'a> {
    owner: &'a StructDef,
    step: &'a Step,
}

impl fmt::Display for Location<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{} (step at {})",
            self.owner.name, self.step.name, self.step.pos
        )
    }
}

pub fn lower(program: &Program) -> Result<LoweredProgram, LowerError> {
    check_declarations(program)?;
    let mut used = HashSet::new();
    collect_identifiers(program, &mut used);
    let mut lowerer = Lowerer {
        program,
        used,
        next_flag: 0,
    };
    let mut structs = Vec::with_capacity(program.structs.len());
    for s in &program.structs {
        let mut steps = Vec::with_capacity(s.steps.len());
        for step in &s.steps {
            let mut ctx = StepCtx {
                owner: s,
                scopes: Vec::new(),
                location: Location { owner: s, step }.to_string(),
            };
            let body = lowerer.block(&step.body, &mut ctx)?;
            debug_assert!(is_core(&body));
            steps.push(Step {
                name: step.name.clone(),
                body,
                pos: step.pos,
            });
        }
        structs.push(StructDef {
            name: s.name.clone(),
            params: s.params.clone(),
            steps,
            pos: s.pos,
        });
    }
    Ok(LoweredProgram(Program {
        structs,
        schedule: program.schedule.clone(),
    }))
}

fn check_declarations(program: &Program) -> Result<(), LowerError> {
    let err = |location: String, kind| Err(LowerError { location, kind });
    let mut structs = HashSet::new();
    let mut steps = HashSet::new();
    for s in &program.structs {
        let loc = || format!("struct {} at {}", s.name, s.pos);
        if !structs.insert(s.name.as_str()) {
            return err(loc(), LowerErrorKind::DuplicateStruct(s.name.clone()));
        }
        let mut params = HashSet::new();
        for p in &s.params {
            if !params.insert(p.name.as_str()) {
                return err(loc(), LowerErrorKind::DuplicateParam(p.name.clone()));
            }
            if let TypeRef::Struct(name) = &p.ty {
                if program.struct_def(name).is_none() {
                    return err(loc(), LowerErrorKind::UnknownType(name.clone()));
                }
            }
        }
        for st in &s.steps {
            if !steps.insert(st.name.as_str()) {
                return err(loc(), LowerErrorKind::DuplicateStep(st.name.clone()));
            }
        }
    }
    for name in program.schedule.step_names() {
        if !steps.contains(name) {
            return err(
                "schedule".into(),
                LowerErrorKind::UnboundStep(name.to_string()),
            );
        }
    }
    Ok(())
}

fn collect_identifiers(program: &Program, used: &mut HashSet<String>) {
    fn stmts(body: &[Statement], used: &mut HashSet<String>) {
        for s in body {
            match s {
                Statement::Declare { name, .. } | Statement::Assign { name, .. } => {
                    used.insert(name.clone());
                }
                Statement::Update { path, field, .. } => {
                    used.extend(path.iter().cloned());
                    used.insert(field.clone());
                }
                Statement::IfThen { body, .. } => stmts(body, used),
                Statement::IfThenElse {
                    then_body,
                    else_body,
                    ..
                } => {
                    stmts(then_body, used);
                    stmts(else_body, used);
                }
                Statement::Expr(_) => {}
            }
        }
    }
    for s in &program.structs {
        used.extend(s.params.iter().map(|p| p.name.clone()));
        for st in &s.steps {
            stmts(&st.body, used);
        }
    }
}

struct Lowerer<'p> {
    program: &'p Program,
    used: HashSet<String>,
    next_flag: usize,
}

struct StepCtx<'p> {
    owner: &'p StructDef,
    scopes: Vec<Vec<(Ident, TypeRef)>>,
    location: String,
}

impl StepCtx<'_> {
    fn fail<T>(&self, kind: LowerErrorKind) -> Result<T, LowerError> {
        Err(LowerError {
            location: self.location.clone(),
            kind,
        })
    }

    fn local(&self, name: &str) -> Option<&TypeRef> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|scope| scope.iter().rev())
            .find(|(n, _)| n == name)
            .map(|(_, ty)| ty)
    }

    fn variable(&self, name: &str) -> Option<TypeRef> {
        self.local(name)
            .cloned()
            .or_else(|| self.owner.param(name).map(|p| p.ty.clone()))
    }
}

fn is_null(e: &Expression) -> bool {
    match e {
        Expression::Null(_) => true,
        Expression::Paren(inner) => is_null(inner),
        _ => false,
    }
}

impl<'p> Lowerer<'p> {
    fn fresh_flag(&mut self) -> Ident {
        loop {
            let name = format!("{FLAG_PREFIX}f{}", self.next_flag);
            self.next_flag += 1;
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn block(
        &mut self,
        body: &[Statement],
        ctx: &mut StepCtx<'p>,
    ) -> Result<Vec<Statement>, LowerError> {
        ctx.scopes.push(Vec::new());
        let mut out = Vec::with_capacity(body.len());
        for stmt in body {
            self.statement(stmt, ctx, &mut out)?;
        }
        ctx.scopes.pop();
        Ok(out)
    }

    fn statement(
        &mut self,
        stmt: &Statement,
        ctx: &mut StepCtx<'p>,
        out: &mut Vec<Statement>,
    ) -> Result<(), LowerError> {
        match stmt {
            Statement::Declare { ty, name, expr } => {
                self.check_type_exists(ty, ctx)?;
                if ctx.variable(name).is_some() {
                    return ctx.fail(LowerErrorKind::Redeclared(name.clone()));
                }
                let mut expr = expr.clone();
                self.expect(&mut expr, ty, ctx)?;
                ctx.scopes
                    .last_mut()
                    .expect("inside a block")
                    .push((name.clone(), ty.clone()));
                out.push(Statement::Declare {
                    ty: ty.clone(),
                    name: name.clone(),
                    expr,
                });
            }
            Statement::Assign { name, expr } => {
                let Some(ty) = ctx.variable(name) else {
                    return ctx.fail(LowerErrorKind::UnresolvedName(name.clone()));
                };
                let mut expr = expr.clone();
                self.expect(&mut expr, &ty, ctx)?;
                out.push(Statement::Assign {
                    name: name.clone(),
                    expr,
                });
            }
            Statement::Update { path, field, expr } => {
                let target = self.path_type(path, ctx)?;
                let ty = self.field_type(&target, field, ctx)?;
                let mut expr = expr.clone();
                self.expect(&mut expr, &ty, ctx)?;
                out.push(Statement::Update {
                    path: path.clone(),
                    field: field.clone(),
                    expr,
                });
            }
            Statement::IfThen { cond, body } => {
                let mut cond = cond.clone();
                self.expect(&mut cond, &TypeRef::Bool, ctx)?;
                let body = self.block(body, ctx)?;
                out.push(Statement::IfThen { cond, body });
            }
            Statement::IfThenElse {
                cond,
                then_body,
                else_body,
            } => {
                for s in self.desugar_chain(cond, then_body, else_body) {
                    self.statement(&s, ctx, out)?;
                }
            }
            Statement::Expr(expr) => {
                if !matches!(expr, Expression::Cons { .. }) {
                    return ctx.fail(LowerErrorKind::NotAConstructor);
                }
                let mut expr = expr.clone();
                self.check(&mut expr, None, ctx)?;
                out.push(Statement::Expr(expr));
            }
        }
        Ok(())
    }

    /// `if c1 {A} else if c2 {B} else {C}` becomes
    /// `Bool f := false; if (!f && c1) {A; f := true;} if (!f && c2) {B; f := true;} if (!f) {C; f := true;}`.
    fn desugar_chain(
        &mut self,
        cond: &Expression,
        then_body: &[Statement],
        else_body: &[Statement],
    ) -> Vec<Statement> {
        let mut arms = vec![(Some(cond.clone()), then_body.to_vec())];
        let mut rest = else_body;
        loop {
            match rest {
                [Statement::IfThen { cond, body }] => {
                    arms.push((Some(cond.clone()), body.clone()));
                    break;
                }
                [Statement::IfThenElse {
                    cond,
                    then_body,
                    else_body,
                }] => {
                    arms.push((Some(cond.clone()), then_body.clone()));
                    rest = else_body;
                }
                [] => break,
                _ => {
                    arms.push((None, rest.to_vec()));
                    break;
                }
            }
        }

        let flag = self.fresh_flag();
        let mut out = vec![Statement::declare(
            TypeRef::Bool,
            &flag,
            Expression::Bool(false),
        )];
        for (cond, mut body) in arms {
            let unset = Expression::negate(Expression::path(&[&flag]));
            let cond = match cond {
                Some(c) => Expression::and(unset, c),
                None => unset,
            };
            body.push(Statement::assign(&flag, Expression::Bool(true)));
            out.push(Statement::IfThen { cond, body });
        }
        out
    }

    fn check_type_exists(&self, ty: &TypeRef, ctx: &StepCtx<'p>) -> Result<(), LowerError> {
        match ty {
            TypeRef::Struct(name) if self.program.struct_def(name).is_none() => {
                ctx.fail(LowerErrorKind::UnknownType(name.clone()))
            }
            _ => Ok(()),
        }
    }

    fn field_type(
        &self,
        ty: &TypeRef,
        field: &str,
        ctx: &StepCtx<'p>,
    ) -> Result<TypeRef, LowerError> {
        let no_field = || LowerErrorKind::NoSuchField {
            ty: ty.clone(),
            field: field.to_string(),
        };
        let TypeRef::Struct(name) = ty else {
            return ctx.fail(no_field());
        };
        match self.program.struct_def(name).and_then(|s| s.param(field)) {
            Some(p) => Ok(p.ty.clone()),
            None => ctx.fail(no_field()),
        }
    }

    fn path_type(&self, ids: &[Ident], ctx: &StepCtx<'p>) -> Result<TypeRef, LowerError> {
        let (head, rest) = ids.split_first().expect("paths are nonempty");
        let Some(mut ty) = ctx.variable(head) else {
            return ctx.fail(LowerErrorKind::UnresolvedName(head.clone()));
        };
        for field in rest {
            ty = self.field_type(&ty, field, ctx)?;
        }
        Ok(ty)
    }

    fn expect(
        &self,
        expr: &mut Expression,
        ty: &TypeRef,
        ctx: &StepCtx<'p>,
    ) -> Result<(), LowerError> {
        let found = self.check(expr, Some(ty), ctx)?;
        if &found != ty {
            return ctx.fail(LowerErrorKind::TypeMismatch {
                expected: ty.clone(),
                found,
            });
        }
        Ok(())
    }

    fn check(
        &self,
        expr: &mut Expression,
        expected: Option<&TypeRef>,
        ctx: &StepCtx<'p>,
    ) -> Result<TypeRef, LowerError> {
        match expr {
            Expression::This => Ok(TypeRef::Struct(ctx.owner.name.clone())),
            Expression::Null(annotation) => match expected {
                Some(ty) => {
                    *annotation = Some(ty.clone());
                    Ok(ty.clone())
                }
                None => ctx.fail(LowerErrorKind::UntypedNull),
            },
            Expression::Int(_) => Ok(TypeRef::Int),
            Expression::Bool(_) => Ok(TypeRef::Bool),
            Expression::Path(ids) => self.path_type(ids, ctx),
            Expression::Cons { name, args } => {
                let Some(def) = self.program.struct_def(name) else {
                    return ctx.fail(LowerErrorKind::UnknownType(name.clone()));
                };
                if def.params.len() != args.len() {
                    return ctx.fail(LowerErrorKind::Arity {
                        name: name.clone(),
                        expected: def.params.len(),
                        found: args.len(),
                    });
                }
                for (arg, param) in args.iter_mut().zip(&def.params) {
                    self.expect(arg, &param.ty, ctx)?;
                }
                Ok(TypeRef::Struct(name.clone()))
            }
            Expression::Not(inner) => {
                self.expect(inner, &TypeRef::Bool, ctx)?;
                Ok(TypeRef::Bool)
            }
            Expression::Paren(inner) => self.check(inner, expected, ctx),
            Expression::BinOp { op, lhs, rhs } => {
                let op = *op;
                match op {
                    BinOp::Eq | BinOp::Ne => {
                        match (is_null(lhs), is_null(rhs)) {
                            (true, true) => return ctx.fail(LowerErrorKind::UntypedNull),
                            (true, false) => {
                                let ty = self.check(rhs, None, ctx)?;
                                self.expect(lhs, &ty, ctx)?;
                            }
                            _ => {
                                let ty = self.check(lhs, None, ctx)?;
                                self.expect(rhs, &ty, ctx)?;
                            }
                        }
                        Ok(TypeRef::Bool)
                    }
                    BinOp::And | BinOp::Or => {
                        self.operand(op, lhs, &TypeRef::Bool, ctx)?;
                        self.operand(op, rhs, &TypeRef::Bool, ctx)?;
                        Ok(TypeRef::Bool)
                    }
                    BinOp::Add | BinOp::Sub => {
                        self.operand(op, lhs, &TypeRef::Int, ctx)?;
                        self.operand(op, rhs, &TypeRef::Int, ctx)?;
                        Ok(TypeRef::Int)
                    }
                    BinOp::Lt | BinOp::Le => {
                        self.operand(op, lhs, &TypeRef::Int, ctx)?;
                        self.operand(op, rhs, &TypeRef::Int, ctx)?;
                        Ok(TypeRef::Bool)
                    }
                }
            }
        }
    }

    fn operand(
        &self,
        op: BinOp,
        expr: &mut Expression,
        ty: &TypeRef,
        ctx: &StepCtx<'p>,
    ) -> Result<(), LowerError> {
        let found = self.check(expr, Some(ty), ctx)?;
        if &found != ty {
            return ctx.fail(LowerErrorKind::BadOperand { op, ty: found });
        }
        Ok(())
    }
}

/// True if `stmts` (recursively) contains no `IfThenElse` and every `null`
/// is annotated.
pub(crate) fn is_core(stmts: &[Statement]) -> bool {
    fn expr_ok(e: &Expression) -> bool {
        match e {
            Expression::Null(ann) => ann.is_some(),
            Expression::Cons { args, .. } => args.iter().all(expr_ok),
            Expression::Not(e) | Expression::Paren(e) => expr_ok(e),
            Expression::BinOp { lhs, rhs, .. } => expr_ok(lhs) && expr_ok(rhs),
            _ => true,
        }
    }
    stmts.iter().all(|s| match s {
        Statement::Declare { expr, .. }
        | Statement::Assign { expr, .. }
        | Statement::Update { expr, .. }
        | Statement::Expr(expr) => expr_ok(expr),
        Statement::IfThen { cond, body } => expr_ok(cond) && is_core(body),
        Statement::IfThenElse { .. } => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, pretty_print};

    const HEADER: &str = "struct TapeCell (left: TapeCell, right: TapeCell, symbol: Int) {}\n";

    fn control(body: &str) -> String {
        format!(
            "{HEADER}struct Control (head: TapeCell, state: Int, accepting: Bool) {{\n  transition {{\n{body}\n  }}\n}}\nFix(transition)\n"
        )
    }

    fn lowered_body(body: &str) -> Vec<Statement> {
        let p = lower(&parse(&control(body)).unwrap()).unwrap();
        p.program().structs[1].steps[0].body.clone()
    }

    fn lower_err(body: &str) -> LowerErrorKind {
        lower(&parse(&control(body)).unwrap()).unwrap_err().kind
    }

    #[test]
    fn else_if_becomes_flagged_ifs() {
        let body = lowered_body(
            "if (state == 1) then { state := 2; } else if (state == 2) then { state := 3; }",
        );
        let f = || Expression::path(&["__f0"]);
        let guard = |q| {
            Expression::and(
                Expression::negate(f()),
                Expression::eq(Expression::path(&["state"]), Expression::Int(q)),
            )
        };
        let arm = |q, next| Statement::IfThen {
            cond: guard(q),
            body: vec![
                Statement::assign("state", Expression::Int(next)),
                Statement::assign("__f0", Expression::Bool(true)),
            ],
        };
        assert_eq!(
            body,
            vec![
                Statement::declare(TypeRef::Bool, "__f0", Expression::Bool(false)),
                arm(1, 2),
                arm(2, 3)
            ]
        );
        assert!(is_core(&body));
    }

    #[test]
    fn final_else_arm_and_nested_chains() {
        let body = lowered_body(
            "if (state == 1) then { if (accepting) then { state := 5; } else { state := 6; } } else { state := 0; }",
        );
        assert_eq!(body.len(), 3);
        let Statement::IfThen { cond, body: arm0 } = &body[1] else {
            panic!()
        };
        assert_eq!(
            cond,
            &Expression::and(
                Expression::negate(Expression::path(&["__f0"])),
                Expression::eq(Expression::path(&["state"]), Expression::Int(1))
            )
        );
        // nested chain gets its own flag
        assert!(matches!(&arm0[0], Statement::Declare { name, .. } if name == "__f1"));
        let Statement::IfThen { cond, .. } = &body[2] else {
            panic!()
        };
        assert_eq!(cond, &Expression::negate(Expression::path(&["__f0"])));
    }

    #[test]
    fn fresh_flags_avoid_existing_names() {
        let src = format!(
            "{HEADER}struct Control (__f0: Int) {{ t {{ if (__f0 == 1) then {{}} else {{ __f0 := 2; }} }} }}\nt"
        );
        let p = lower(&parse(&src).unwrap()).unwrap();
        let Statement::Declare { name, .. } = &p.program().structs[1].steps[0].body[0] else {
            panic!()
        };
        assert_eq!(name, "__f1");
    }

    #[test]
    fn null_takes_its_type_from_context() {
        let body = lowered_body(
            "head.right := null; TapeCell c := TapeCell(null, head, 0); if (head.left == null) then {} if (null != head) then {}",
        );
        let tc = || Some(TypeRef::named("TapeCell"));
        assert_eq!(
            body[0],
            Statement::update(&["head"], "right", Expression::Null(tc()))
        );
        let Statement::Declare {
            expr: Expression::Cons { args, .. },
            ..
        } = &body[1]
        else {
            panic!()
        };
        assert_eq!(args[0], Expression::Null(tc()));
        let Statement::IfThen {
            cond: Expression::BinOp { rhs, .. },
            ..
        } = &body[2]
        else {
            panic!()
        };
        assert_eq!(**rhs, Expression::Null(tc()));
        let Statement::IfThen {
            cond: Expression::BinOp { lhs, .. },
            ..
        } = &body[3]
        else {
            panic!()
        };
        assert_eq!(**lhs, Expression::Null(tc()));
    }

    #[test]
    fn lowering_errors() {
        assert_eq!(
            lower_err("x := null;"),
            LowerErrorKind::UnresolvedName("x".into())
        );
        assert_eq!(
            lower_err("if (null == null) then {}"),
            LowerErrorKind::UntypedNull
        );
        assert_eq!(
            lower_err("state := true;"),
            LowerErrorKind::TypeMismatch {
                expected: TypeRef::Int,
                found: TypeRef::Bool
            }
        );
        assert_eq!(
            lower_err("head.colour := 1;"),
            LowerErrorKind::NoSuchField {
                ty: TypeRef::named("TapeCell"),
                field: "colour".into()
            }
        );
        assert!(matches!(
            lower_err("TapeCell(head, 0);"),
            LowerErrorKind::Arity {
                expected: 3,
                found: 2,
                ..
            }
        ));
        assert!(matches!(
            lower_err("if (state) then {}"),
            LowerErrorKind::TypeMismatch { .. }
        ));
        assert!(matches!(
            lower_err("Int state := 1;"),
            LowerErrorKind::Redeclared(_)
        ));
        assert!(matches!(
            lower_err("if (accepting < 1) then {}"),
            LowerErrorKind::BadOperand { .. }
        ));

        let bad_sched = format!("{HEADER}missing");
        let e = lower(&parse(&bad_sched).unwrap()).unwrap_err();
        assert_eq!(e.kind, LowerErrorKind::UnboundStep("missing".into()));
        let dup = "struct A () {} struct A () { s {} }\ns";
        assert!(matches!(
            lower(&parse(dup).unwrap()).unwrap_err().kind,
            LowerErrorKind::DuplicateStruct(_)
        ));
    }

    #[test]
    fn error_mentions_location() {
        let e = lower(&parse(&control("x := 1;")).unwrap()).unwrap_err();
        assert!(
            e.to_string()
                .starts_with("Control.transition (step at 3:3)"),
            "{e}"
        );
    }

    #[test]
    fn locals_are_block_scoped() {
        assert_eq!(
            lower_err("if (true) then { Int k := 1; } state := k;"),
            LowerErrorKind::UnresolvedName("k".into())
        );
        lowered_body("Int k := 1; if (true) then { k := k + 1; } state := k;");
    }

    #[test]
    fn lowered_output_reparses() {
        let src = control("if (state == 1 && head.symbol == 0) then { state := 2; } else if (state == 2) then { head := head.right; }");
        let lowered = lower(&parse(&src).unwrap()).unwrap();
        let again = lower(&parse(&pretty_print(lowered.program())).unwrap()).unwrap();
        assert_eq!(again, lowered);
    }
}
