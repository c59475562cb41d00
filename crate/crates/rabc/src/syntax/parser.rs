//! Recursive descent parser for the surface grammar.

use thiserror::Error;

use super::ast::*;
use super::lexer::{LexError, Lexer, TokKind, Token};

/// Parse error with source position and expectation.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at {span}: expected {expected}, found {found}")]
pub struct ParseError {
    pub span: Span,
    pub expected: String,
    pub found: String,
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            span: e.span,
            expected: "a valid token".into(),
            found: e.message,
        }
    }
}

pub type ParseResult<T> = Result<T, ParseError>;

/// Parse a whole program from source text.
pub fn parse(source: &str) -> ParseResult<Program> {
    let tokens = Lexer::new(source).tokenize()?;
    let mut p = Parser { tokens, pos: 0 };
    p.parse_program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self) -> &TokKind {
        &self.peek().kind
    }

    fn peek2_kind(&self) -> &TokKind {
        let i = (self.pos + 1).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn span(&self) -> Span {
        self.peek().span
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek_kind() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokKind) -> ParseResult<Token> {
        if self.peek_kind() == &kind {
            Ok(self.bump())
        } else {
            Err(self.err(&format!("{}", kind)))
        }
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError {
            span: self.span(),
            expected: expected.to_string(),
            found: format!("{}", self.peek_kind()),
        }
    }

    fn ident(&mut self) -> ParseResult<String> {
        match self.peek_kind().clone() {
            TokKind::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => Err(self.err("an identifier")),
        }
    }

    fn parse_program(&mut self) -> ParseResult<Program> {
        let mut functions = Vec::new();
        while self.peek_kind() != &TokKind::Eof {
            functions.push(self.parse_fn()?);
        }
        Ok(Program { functions })
    }

    fn parse_fn(&mut self) -> ParseResult<Function> {
        let span = self.span();
        self.expect(TokKind::KwFn)?;
        let name = self.ident()?;
        self.expect(TokKind::LParen)?;
        let mut params = Vec::new();
        if self.peek_kind() != &TokKind::RParen {
            loop {
                let pname = self.ident()?;
                self.expect(TokKind::Colon)?;
                let ty = self.parse_type()?;
                params.push((pname, ty));
                if !self.eat(&TokKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokKind::RParen)?;
        self.expect(TokKind::Arrow)?;
        let ret = self.parse_type()?;
        let body = self.parse_block()?;
        Ok(Function {
            name,
            params,
            ret,
            body,
            span,
        })
    }

    fn parse_type(&mut self) -> ParseResult<SimpleType> {
        match self.peek_kind() {
            TokKind::KwI32 => {
                self.bump();
                Ok(SimpleType::Int)
            }
            TokKind::KwBool => {
                self.bump();
                Ok(SimpleType::Bool)
            }
            TokKind::KwList => {
                self.bump();
                Ok(SimpleType::List)
            }
            TokKind::KwUnit => {
                self.bump();
                Ok(SimpleType::Unit)
            }
            TokKind::KwBox => {
                self.bump();
                self.expect(TokKind::KwList)?;
                Ok(SimpleType::BoxList)
            }
            TokKind::Amp => {
                self.bump();
                if self.eat(&TokKind::KwMut) {
                    Ok(SimpleType::MutRef(Box::new(self.parse_type()?)))
                } else {
                    Ok(SimpleType::SharedRef(Box::new(self.parse_type()?)))
                }
            }
            _ => Err(self.err("a type")),
        }
    }

    fn parse_block(&mut self) -> ParseResult<Block> {
        let span = self.span();
        self.expect(TokKind::LBrace)?;
        let mut lets = Vec::new();
        while self.peek_kind() == &TokKind::KwLet {
            let lspan = self.span();
            self.bump();
            let name = self.ident()?;
            self.expect(TokKind::Colon)?;
            let ty = self.parse_type()?;
            self.expect(TokKind::Semi)?;
            lets.push(LocalDecl {
                name,
                ty,
                span: lspan,
            });
        }
        let mut stmts = Vec::new();
        while self.peek_kind() != &TokKind::RBrace {
            let s = self.parse_stmt()?;
            self.expect(TokKind::Semi)?;
            stmts.push(s);
        }
        self.expect(TokKind::RBrace)?;
        Ok(Block { lets, stmts, span })
    }

    fn parse_stmt(&mut self) -> ParseResult<Stmt> {
        let span = self.span();
        let kind = match self.peek_kind() {
            TokKind::KwTick => {
                self.bump();
                self.expect(TokKind::LParen)?;
                let neg = self.eat(&TokKind::Minus);
                let n = match self.peek_kind() {
                    TokKind::Int(n) => {
                        let n = *n;
                        self.bump();
                        n
                    }
                    _ => return Err(self.err("an integer")),
                };
                self.expect(TokKind::RParen)?;
                StmtKind::Tick(if neg { -n } else { n })
            }
            TokKind::KwReturn => {
                self.bump();
                StmtKind::Return
            }
            TokKind::KwDrop => {
                self.bump();
                StmtKind::Drop(self.parse_place()?)
            }
            TokKind::KwIf => {
                self.bump();
                let cond = self.parse_place()?;
                let then_arm = self.parse_block()?;
                self.expect(TokKind::KwElse)?;
                let else_arm = self.parse_block()?;
                StmtKind::If(cond, then_arm, else_arm)
            }
            TokKind::KwMatch => {
                self.bump();
                let scrutinee = self.parse_place()?;
                self.expect(TokKind::LBrace)?;
                self.expect(TokKind::KwNil)?;
                self.expect(TokKind::FatArrow)?;
                let nil_arm = self.parse_block()?;
                self.expect(TokKind::Comma)?;
                self.expect(TokKind::KwCons)?;
                self.expect(TokKind::LParen)?;
                let hd = self.ident()?;
                self.expect(TokKind::Comma)?;
                let tl = self.ident()?;
                self.expect(TokKind::RParen)?;
                self.expect(TokKind::FatArrow)?;
                let cons_arm = self.parse_block()?;
                self.expect(TokKind::RBrace)?;
                StmtKind::Match {
                    scrutinee,
                    nil_arm,
                    hd,
                    tl,
                    cons_arm,
                }
            }
            _ => {
                let place = self.parse_place()?;
                self.expect(TokKind::Assign)?;
                match self.peek_kind() {
                    TokKind::KwCons => {
                        self.bump();
                        self.expect(TokKind::LParen)?;
                        let head = self.parse_expr()?;
                        self.expect(TokKind::Comma)?;
                        let tail = self.parse_expr()?;
                        self.expect(TokKind::RParen)?;
                        StmtKind::AssignCons(place, head, tail)
                    }
                    TokKind::Ident(_) if self.peek2_kind() == &TokKind::LParen => {
                        let callee = self.ident()?;
                        self.expect(TokKind::LParen)?;
                        let mut args = Vec::new();
                        if self.peek_kind() != &TokKind::RParen {
                            loop {
                                args.push(self.parse_expr()?);
                                if !self.eat(&TokKind::Comma) {
                                    break;
                                }
                            }
                        }
                        self.expect(TokKind::RParen)?;
                        StmtKind::AssignCall(place, callee, args)
                    }
                    _ => StmtKind::Assign(place, self.parse_expr()?),
                }
            }
        };
        Ok(Stmt { kind, span })
    }

    fn parse_place(&mut self) -> ParseResult<Place> {
        if self.eat(&TokKind::Star) {
            Ok(self.parse_place()?.deref())
        } else {
            Ok(Place::Var(self.ident()?))
        }
    }

    // Comparison < additive < multiplicative.
    fn parse_expr(&mut self) -> ParseResult<Expr> {
        let span = self.span();
        let mut lhs = self.parse_additive()?;
        loop {
            let op = match self.peek_kind() {
                TokKind::Lt => BinOp::Lt,
                TokKind::Le => BinOp::Le,
                TokKind::EqEq => BinOp::EqEq,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_additive()?;
            lhs = Expr {
                kind: ExprKind::BinOp(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn parse_additive(&mut self) -> ParseResult<Expr> {
        let span = self.span();
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek_kind() {
                TokKind::Plus => BinOp::Add,
                TokKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_multiplicative()?;
            lhs = Expr {
                kind: ExprKind::BinOp(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn parse_multiplicative(&mut self) -> ParseResult<Expr> {
        let span = self.span();
        let mut lhs = self.parse_primary()?;
        while self.eat(&TokKind::Star) {
            let rhs = self.parse_primary()?;
            lhs = Expr {
                kind: ExprKind::BinOp(BinOp::Mul, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn parse_primary(&mut self) -> ParseResult<Expr> {
        let span = self.span();
        let kind = match self.peek_kind().clone() {
            TokKind::Int(n) => {
                self.bump();
                ExprKind::IntLit(n)
            }
            TokKind::KwTrue => {
                self.bump();
                ExprKind::True
            }
            TokKind::KwFalse => {
                self.bump();
                ExprKind::False
            }
            TokKind::KwNil => {
                self.bump();
                ExprKind::Nil
            }
            TokKind::KwBox => {
                self.bump();
                self.expect(TokKind::LParen)?;
                let inner = self.parse_expr()?;
                self.expect(TokKind::RParen)?;
                ExprKind::Boxed(Box::new(inner))
            }
            TokKind::KwCopy => {
                self.bump();
                ExprKind::Copy(self.parse_place()?)
            }
            TokKind::KwMove => {
                self.bump();
                ExprKind::Move(self.parse_place()?)
            }
            TokKind::Amp => {
                self.bump();
                if self.eat(&TokKind::KwMut) {
                    ExprKind::BorrowMut(self.parse_place()?)
                } else {
                    ExprKind::BorrowShared(self.parse_place()?)
                }
            }
            _ => return Err(self.err("an expression")),
        };
        Ok(Expr { kind, span })
    }
}
