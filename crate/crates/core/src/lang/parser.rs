//! Recursive-descent parser for AuDaLa source.
//!
//! ```text
//! program   := struct* schedule EOF
//! struct    := 'struct' ID '(' (ID ':' type (',' ID ':' type)*)? ')' '{' step* '}'
//! step      := ID '{' stmt* '}'
//! stmt      := type ID ':=' expr ';'
//!            | ID ('.' ID)* ':=' expr ';'
//!            | ID '(' args ')' ';'
//!            | 'if' '(' expr ')' 'then' '{' stmt* '}' ('else' (if-stmt | '{' stmt* '}'))?
//! schedule  := atom ('<' atom)*
//! atom      := ID | 'Fix' '(' schedule ')' | '(' schedule ')'
//! ```

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

pub fn parse(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, at: 0 };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn advance(&mut self) -> Tok {
        let tok = self.tokens[self.at].tok.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        tok
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::new(
            self.pos(),
            format!("expected {expected}, found {}", self.peek()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut structs = Vec::new();
        while *self.peek() == Tok::KwStruct {
            structs.push(self.struct_def()?);
        }
        let schedule = self.schedule()?;
        if *self.peek() != Tok::Eof {
            return self.unexpected("`<` or end of input");
        }
        Ok(Program { structs, schedule })
    }

    fn type_ref(&mut self) -> PResult<TypeRef> {
        match self.peek().clone() {
            Tok::KwInt => {
                self.advance();
                Ok(TypeRef::Int)
            }
            Tok::KwBool => {
                self.advance();
                Ok(TypeRef::Bool)
            }
            Tok::Ident(name) => {
                self.advance();
                Ok(TypeRef::Struct(name))
            }
            _ => self.unexpected("type"),
        }
    }

    fn struct_def(&mut self) -> PResult<StructDef> {
        let pos = self.pos();
        self.expect(Tok::KwStruct)?;
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let pname = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.type_ref()?;
                params.push(Param { name: pname, ty });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let mut steps = Vec::new();
        while *self.peek() != Tok::RBrace {
            let pos = self.pos();
            let sname = self.ident()?;
            let body = self.block()?;
            steps.push(Step {
                name: sname,
                body,
                pos,
            });
        }
        self.expect(Tok::RBrace)?;
        Ok(StructDef {
            name,
            params,
            steps,
            pos,
        })
    }

    fn block(&mut self) -> PResult<Vec<Statement>> {
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while *self.peek() != Tok::RBrace {
            body.push(self.statement()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(body)
    }

    fn statement(&mut self) -> PResult<Statement> {
        match self.peek().clone() {
            Tok::KwIf => self.if_statement(),
            Tok::KwInt | Tok::KwBool => self.declaration(),
            Tok::Ident(name) => match self.peek_at(1) {
                Tok::Ident(_) => self.declaration(),
                Tok::LParen => {
                    let expr = self.expression()?;
                    self.expect(Tok::Semi)?;
                    Ok(Statement::Expr(expr))
                }
                Tok::Assign => {
                    self.advance();
                    self.advance();
                    let expr = self.expression()?;
                    self.expect(Tok::Semi)?;
                    Ok(Statement::Assign { name, expr })
                }
                Tok::Dot => {
                    let mut path = vec![self.ident()?];
                    while self.eat(&Tok::Dot) {
                        path.push(self.ident()?);
                    }
                    self.expect(Tok::Assign)?;
                    let expr = self.expression()?;
                    self.expect(Tok::Semi)?;
                    let field = path.pop().expect("path has at least two ids");
                    Ok(Statement::Update { path, field, expr })
                }
                _ => {
                    self.advance();
                    self.unexpected("`:=`, `.`, `(` or identifier")
                }
            },
            _ => self.unexpected("statement"),
        }
    }

    fn declaration(&mut self) -> PResult<Statement> {
        let ty = self.type_ref()?;
        let name = self.ident()?;
        self.expect(Tok::Assign)?;
        let expr = self.expression()?;
        self.expect(Tok::Semi)?;
        Ok(Statement::Declare { ty, name, expr })
    }

    fn if_statement(&mut self) -> PResult<Statement> {
        self.expect(Tok::KwIf)?;
        self.expect(Tok::LParen)?;
        let cond = self.expression()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::KwThen)?;
        let then_body = self.block()?;
        if !self.eat(&Tok::KwElse) {
            return Ok(Statement::IfThen {
                cond,
                body: then_body,
            });
        }
        let else_body = if *self.peek() == Tok::KwIf {
            vec![self.if_statement()?]
        } else {
            self.block()?
        };
        Ok(Statement::IfThenElse {
            cond,
            then_body,
            else_body,
        })
    }

    fn expression(&mut self) -> PResult<Expression> {
        self.binary(1)
    }

    fn binop_at(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::AndAnd => BinOp::And,
            Tok::OrOr => BinOp::Or,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expression> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop_at() {
            if op.precedence() < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expression::BinOp {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expression> {
        if self.eat(&Tok::Bang) {
            return Ok(Expression::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expression> {
        match self.peek().clone() {
            Tok::KwThis => {
                self.advance();
                Ok(Expression::This)
            }
            Tok::KwNull => {
                self.advance();
                Ok(Expression::Null(None))
            }
            Tok::KwTrue => {
                self.advance();
                Ok(Expression::Bool(true))
            }
            Tok::KwFalse => {
                self.advance();
                Ok(Expression::Bool(false))
            }
            Tok::Int(v) => {
                self.advance();
                Ok(Expression::Int(v))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.advance();
                let Tok::Int(v) = self.advance() else {
                    unreachable!()
                };
                Ok(Expression::Int(-v))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expression()?;
                self.expect(Tok::RParen)?;
                Ok(Expression::Paren(Box::new(inner)))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.expression()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    return Ok(Expression::Cons { name, args });
                }
                let mut ids = vec![name];
                while self.eat(&Tok::Dot) {
                    ids.push(self.ident()?);
                }
                Ok(Expression::Path(ids))
            }
            _ => self.unexpected("expression"),
        }
    }

    fn schedule(&mut self) -> PResult<Schedule> {
        let mut sched = self.schedule_atom()?;
        while self.eat(&Tok::Lt) {
            let next = self.schedule_atom()?;
            sched = Schedule::Seq(Box::new(sched), Box::new(next));
        }
        Ok(sched)
    }

    fn schedule_atom(&mut self) -> PResult<Schedule> {
        match self.peek().clone() {
            Tok::KwFix => {
                self.advance();
                self.expect(Tok::LParen)?;
                let body = self.schedule()?;
                self.expect(Tok::RParen)?;
                Ok(Schedule::Fix(Box::new(body)))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.schedule()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.advance();
                Ok(Schedule::Call(name))
            }
            _ => self.unexpected("schedule"),
        }
    }
}
