use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

/// Renders `program` as source text. Parentheses are emitted only where the
/// tree has `Paren` nodes (and around right-nested schedule sequences), so
/// trees built with [`Expression::binop`] re-parse to themselves.
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for s in &program.structs {
        print_struct(&mut out, s);
    }
    out.push_str(&schedule_to_string(&program.schedule));
    out.push('\n');
    out
}

fn print_struct(out: &mut String, s: &StructDef) {
    let params: Vec<String> = s
        .params
        .iter()
        .map(|p| format!("{}: {}", p.name, p.ty))
        .collect();
    write!(out, "struct {} ({})", s.name, params.join(", ")).unwrap();
    if s.steps.is_empty() {
        out.push_str(" {}\n");
        return;
    }
    out.push_str(" {\n");
    for step in &s.steps {
        writeln!(out, "{INDENT}{} {{", step.name).unwrap();
        print_block(out, &step.body, 2);
        writeln!(out, "{INDENT}}}").unwrap();
    }
    out.push_str("}\n");
}

fn print_block(out: &mut String, body: &[Statement], depth: usize) {
    for stmt in body {
        out.push_str(&INDENT.repeat(depth));
        print_statement(out, stmt, depth);
        out.push('\n');
    }
}

fn print_statement(out: &mut String, stmt: &Statement, depth: usize) {
    match stmt {
        Statement::Declare { ty, name, expr } => {
            write!(out, "{ty} {name} := {};", expr_to_string(expr)).unwrap()
        }
        Statement::Assign { name, expr } => {
            write!(out, "{name} := {};", expr_to_string(expr)).unwrap()
        }
        Statement::Update { path, field, expr } => write!(
            out,
            "{}.{field} := {};",
            path.join("."),
            expr_to_string(expr)
        )
        .unwrap(),
        Statement::Expr(expr) => write!(out, "{};", expr_to_string(expr)).unwrap(),
        Statement::IfThen { cond, body } => print_if(out, cond, body, depth),
        Statement::IfThenElse {
            cond,
            then_body,
            else_body,
        } => {
            print_if(out, cond, then_body, depth);
            out.push_str(" else ");
            match else_body.as_slice() {
                [nested @ (Statement::IfThen { .. } | Statement::IfThenElse { .. })] => {
                    print_statement(out, nested, depth)
                }
                _ => print_braced(out, else_body, depth),
            }
        }
    }
}

fn print_if(out: &mut String, cond: &Expression, body: &[Statement], depth: usize) {
    write!(out, "if ({}) then ", expr_to_string(cond)).unwrap();
    print_braced(out, body, depth);
}

fn print_braced(out: &mut String, body: &[Statement], depth: usize) {
    if body.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    print_block(out, body, depth + 1);
    out.push_str(&INDENT.repeat(depth));
    out.push('}');
}

pub fn expr_to_string(expr: &Expression) -> String {
    let mut out = String::new();
    print_expr(&mut out, expr);
    out
}

fn print_expr(out: &mut String, expr: &Expression) {
    match expr {
        Expression::This => out.push_str("this"),
        Expression::Null(_) => out.push_str("null"),
        Expression::Int(v) => write!(out, "{v}").unwrap(),
        Expression::Bool(b) => write!(out, "{b}").unwrap(),
        Expression::Path(ids) => out.push_str(&ids.join(".")),
        Expression::Cons { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_expr(out, a);
            }
            out.push(')');
        }
        Expression::Not(inner) => {
            out.push('!');
            print_expr(out, inner);
        }
        Expression::Paren(inner) => {
            out.push('(');
            print_expr(out, inner);
            out.push(')');
        }
        Expression::BinOp { op, lhs, rhs } => {
            print_expr(out, lhs);
            write!(out, " {op} ").unwrap();
            print_expr(out, rhs);
        }
    }
}

pub fn schedule_to_string(sched: &Schedule) -> String {
    match sched {
        Schedule::Call(name) => name.clone(),
        Schedule::Fix(body) => format!("Fix({})", schedule_to_string(body)),
        Schedule::Seq(a, b) => {
            let rhs = match **b {
                Schedule::Seq(..) => format!("({})", schedule_to_string(b)),
                _ => schedule_to_string(b),
            };
            format!("{} < {rhs}", schedule_to_string(a))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;
    use proptest::prelude::*;

    #[test]
    fn fix_of_sequence() {
        let s = Schedule::fix(Schedule::seq(Schedule::call("a"), Schedule::call("b")));
        assert_eq!(schedule_to_string(&s), "Fix(a < b)");
    }

    #[test]
    fn else_if_chain_layout() {
        let src = "struct C (s: Int) {\n    t {\n        if (s == 1) then {\n            s := 2;\n        } else if (s == 2) then {} else {\n            s := 0;\n        }\n    }\n}\nFix(t)\n";
        let p = parse(src).unwrap();
        assert_eq!(pretty_print(&p), src);
    }

    fn arb_leaf() -> impl Strategy<Value = Expression> {
        prop_oneof![
            Just(Expression::This),
            Just(Expression::null()),
            (-50i64..50).prop_map(Expression::Int),
            any::<bool>().prop_map(Expression::Bool),
            prop::sample::select(vec!["a", "b", "head"]).prop_map(|h| Expression::path(&[h])),
            Just(Expression::path(&["head", "right", "symbol"])),
        ]
    }

    fn arb_expr() -> impl Strategy<Value = Expression> {
        let ops = vec![
            BinOp::Eq,
            BinOp::Ne,
            BinOp::And,
            BinOp::Or,
            BinOp::Add,
            BinOp::Sub,
            BinOp::Lt,
            BinOp::Le,
        ];
        arb_leaf().prop_recursive(4, 32, 3, move |inner| {
            prop_oneof![
                (
                    prop::sample::select(ops.clone()),
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Expression::binop(op, l, r)),
                inner.clone().prop_map(Expression::negate),
                inner.clone().prop_map(|e| Expression::Paren(Box::new(e))),
                prop::collection::vec(inner, 0..3).prop_map(|args| Expression::cons("T", args)),
            ]
        })
    }

    fn arb_stmt() -> impl Strategy<Value = Statement> {
        let simple = prop_oneof![
            arb_expr().prop_map(|e| Statement::declare(TypeRef::Int, "x", e)),
            arb_expr().prop_map(|e| Statement::assign("a", e)),
            arb_expr().prop_map(|e| Statement::update(&["head", "left"], "symbol", e)),
            prop::collection::vec(arb_expr(), 0..2)
                .prop_map(|args| Statement::Expr(Expression::cons("T", args))),
        ];
        simple.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                (arb_expr(), prop::collection::vec(inner.clone(), 0..3))
                    .prop_map(|(cond, body)| Statement::IfThen { cond, body }),
                (
                    arb_expr(),
                    prop::collection::vec(inner.clone(), 0..2),
                    prop::collection::vec(inner, 0..2)
                )
                    .prop_map(|(cond, then_body, else_body)| {
                        Statement::IfThenElse {
                            cond,
                            then_body,
                            else_body,
                        }
                    }),
            ]
        })
    }

    fn arb_schedule() -> impl Strategy<Value = Schedule> {
        prop::sample::select(vec!["s", "t"])
            .prop_map(Schedule::call)
            .prop_recursive(4, 16, 2, |inner| {
                prop_oneof![
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Schedule::seq(a, b)),
                    inner.prop_map(Schedule::fix),
                ]
            })
    }

    proptest! {
        #[test]
        fn parse_inverts_pretty_print(
            body in prop::collection::vec(arb_stmt(), 0..5),
            schedule in arb_schedule(),
        ) {
            let program = Program {
                structs: vec![
                    StructDef {
                        name: "T".into(),
                        params: vec![Param::new("a", TypeRef::Int), Param::new("head", TypeRef::named("T"))],
                        steps: vec![Step::new("s", body), Step::new("t", vec![])],
                        pos: Pos::default(),
                    },
                    StructDef {
                        name: "U".into(),
                        params: vec![],
                        steps: vec![],
                        pos: Pos::default(),
                    },
                ],
                schedule,
            };
            let text = pretty_print(&program);
            let reparsed = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            prop_assert_eq!(reparsed, program);
        }
    }
}
