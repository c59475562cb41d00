//! Structural validation: declaredness, shape checking, and the shallow
//! borrow lints. Programs are otherwise trusted to be well-borrowed.

use std::collections::HashMap;
use std::fmt;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub message: String,
    pub span: Span,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// All violations found in a program; empty means accepted for analysis.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{}", v)?;
        }
        Ok(())
    }
}

struct Validator<'a> {
    program: &'a Program,
    scope: HashMap<&'a str, &'a SimpleType>,
    report: ValidationReport,
}

/// Validate a parsed program, reporting every violation found.
pub fn validate(program: &Program) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashMap::new();
    for f in &program.functions {
        if let Some(prev) = seen.insert(f.name.as_str(), f.span) {
            report.violations.push(Violation {
                message: format!("function `{}` is defined twice (first at {})", f.name, prev),
                span: f.span,
            });
        }
    }
    for f in &program.functions {
        let mut v = Validator {
            program,
            scope: HashMap::new(),
            report: ValidationReport::default(),
        };
        v.check_function(f);
        report.violations.extend(v.report.violations);
    }
    report
}

impl<'a> Validator<'a> {
    fn violation(&mut self, span: Span, message: impl Into<String>) {
        self.report.violations.push(Violation {
            message: message.into(),
            span,
        });
    }

    fn check_function(&mut self, f: &'a Function) {
        let mut declared: Vec<(&str, &SimpleType, Span)> = Vec::new();
        for (name, ty) in &f.params {
            declared.push((name, ty, f.span));
        }
        for decl in f.locals() {
            declared.push((&decl.name, &decl.ty, decl.span));
        }
        declared.push((RET, &f.ret, f.span));
        for (name, ty, span) in &declared {
            if self.scope.insert(name, ty).is_some() {
                self.violation(
                    *span,
                    format!("variable `{}` declared more than once in `{}`", name, f.name),
                );
            }
            self.check_type(ty, *span);
        }
        self.check_block(&f.body, true);
        self.scope.clear();
    }

    fn check_type(&mut self, ty: &SimpleType, span: Span) {
        if ty.has_shared_of_mut() {
            self.violation(
                span,
                format!("shared borrow of mutable borrow in type `{}`", ty),
            );
        }
    }

    fn check_block(&mut self, b: &'a Block, is_body: bool) {
        if !is_body && !b.lets.is_empty() {
            self.violation(
                b.lets[0].span,
                "locals may be declared only at the top of the function body",
            );
        }
        let last = b.stmts.len().saturating_sub(1);
        for (i, s) in b.stmts.iter().enumerate() {
            if matches!(s.kind, StmtKind::Return) && !(is_body && i == last) {
                self.violation(s.span, "`return` is allowed only as the final statement");
            }
            self.check_stmt(s);
        }
    }

    fn check_stmt(&mut self, s: &'a Stmt) {
        match &s.kind {
            StmtKind::Tick(_) | StmtKind::Return => {}
            StmtKind::Drop(p) => {
                self.place_type(p, s.span);
            }
            StmtKind::If(cond, then_arm, else_arm) => {
                if let Some(t) = self.place_type(cond, s.span) {
                    if t != SimpleType::Bool {
                        self.violation(
                            s.span,
                            format!("`if` condition `{}` has type `{}`, expected `bool`", cond, t),
                        );
                    }
                }
                self.check_block(then_arm, false);
                self.check_block(else_arm, false);
            }
            StmtKind::Match {
                scrutinee,
                nil_arm,
                hd,
                tl,
                cons_arm,
            } => {
                if let Some(t) = self.place_type(scrutinee, s.span) {
                    if t != SimpleType::List {
                        self.violation(
                            s.span,
                            format!(
                                "`match` scrutinee `{}` has type `{}`, expected `list`",
                                scrutinee, t
                            ),
                        );
                    }
                }
                self.check_binder(hd, &SimpleType::Int, s.span);
                self.check_binder(tl, &SimpleType::BoxList, s.span);
                self.check_block(nil_arm, false);
                self.check_block(cons_arm, false);
            }
            StmtKind::Assign(p, e) => {
                let pt = self.place_type(p, s.span);
                let et = self.expr_type(e);
                if let (Some(pt), Some(et)) = (pt, et) {
                    if pt != et {
                        self.violation(
                            s.span,
                            format!("cannot assign `{}` to `{}` of type `{}`", et, p, pt),
                        );
                    }
                }
            }
            StmtKind::AssignCons(p, head, tail) => {
                if let Some(t) = self.place_type(p, s.span) {
                    if t != SimpleType::List {
                        self.violation(
                            s.span,
                            format!("cons target `{}` has type `{}`, expected `list`", p, t),
                        );
                    }
                }
                if let Some(t) = self.expr_type(head) {
                    if t != SimpleType::Int {
                        self.violation(head.span, format!("cons head has type `{}`, expected `i32`", t));
                    }
                }
                if let Some(t) = self.expr_type(tail) {
                    if t != SimpleType::BoxList {
                        self.violation(
                            tail.span,
                            format!("cons tail has type `{}`, expected `box list`", t),
                        );
                    }
                }
            }
            StmtKind::AssignCall(p, callee, args) => {
                let Some(callee_fn) = self.program.function(callee) else {
                    self.violation(s.span, format!("call to undefined function `{}`", callee));
                    for a in args {
                        self.expr_type(a);
                    }
                    return;
                };
                if args.len() != callee_fn.params.len() {
                    self.violation(
                        s.span,
                        format!(
                            "`{}` takes {} argument(s) but {} were supplied",
                            callee,
                            callee_fn.params.len(),
                            args.len()
                        ),
                    );
                }
                for (a, (pname, pty)) in args.iter().zip(&callee_fn.params) {
                    if let Some(t) = self.expr_type(a) {
                        if &t != pty {
                            self.violation(
                                a.span,
                                format!(
                                    "argument for `{}` of `{}` has type `{}`, expected `{}`",
                                    pname, callee, t, pty
                                ),
                            );
                        }
                    }
                }
                if let Some(t) = self.place_type(p, s.span) {
                    if t != callee_fn.ret {
                        self.violation(
                            s.span,
                            format!(
                                "`{}` returns `{}` but the destination `{}` has type `{}`",
                                callee, callee_fn.ret, p, t
                            ),
                        );
                    }
                }
            }
        }
    }

    fn check_binder(&mut self, name: &str, want: &SimpleType, span: Span) {
        match self.scope.get(name) {
            None => self.violation(
                span,
                format!("match binder `{}` is not a declared local", name),
            ),
            Some(t) if *t != want => self.violation(
                span,
                format!("match binder `{}` has type `{}`, expected `{}`", name, t, want),
            ),
            _ => {}
        }
    }

    /// Declared shape of a place, if resolvable.
    fn place_type(&mut self, p: &Place, span: Span) -> Option<SimpleType> {
        match p {
            Place::Var(x) => match self.scope.get(x.as_str()) {
                Some(t) => Some((*t).clone()),
                None => {
                    self.violation(span, format!("undeclared variable `{}`", x));
                    None
                }
            },
            Place::Deref(base) => {
                let t = self.place_type(base, span)?;
                match t {
                    SimpleType::BoxList => Some(SimpleType::List),
                    SimpleType::SharedRef(inner) | SimpleType::MutRef(inner) => Some(*inner),
                    other => {
                        self.violation(
                            span,
                            format!("cannot dereference `{}` of type `{}`", base, other),
                        );
                        None
                    }
                }
            }
        }
    }

    fn expr_type(&mut self, e: &Expr) -> Option<SimpleType> {
        match &e.kind {
            ExprKind::IntLit(_) => Some(SimpleType::Int),
            ExprKind::True | ExprKind::False => Some(SimpleType::Bool),
            ExprKind::Nil => Some(SimpleType::List),
            ExprKind::Boxed(inner) => {
                let t = self.expr_type(inner)?;
                if t != SimpleType::List {
                    self.violation(
                        inner.span,
                        format!("`box` payload has type `{}`, expected `list`", t),
                    );
                    return None;
                }
                Some(SimpleType::BoxList)
            }
            ExprKind::BinOp(op, lhs, rhs) => {
                for side in [lhs, rhs] {
                    if let Some(t) = self.expr_type(side) {
                        if t != SimpleType::Int {
                            self.violation(
                                side.span,
                                format!("operand of `{}` has type `{}`, expected `i32`", op, t),
                            );
                        }
                    }
                }
                Some(if op.is_comparison() {
                    SimpleType::Bool
                } else {
                    SimpleType::Int
                })
            }
            ExprKind::Copy(p) => {
                let t = self.place_type(p, e.span)?;
                if !t.is_atom() {
                    self.violation(
                        e.span,
                        format!("`copy` applies to `i32` or `bool`, not `{}`", t),
                    );
                    return None;
                }
                Some(t)
            }
            ExprKind::BorrowShared(p) => {
                let t = self.place_type(p, e.span)?;
                Some(SimpleType::SharedRef(Box::new(t)))
            }
            ExprKind::BorrowMut(p) => {
                let t = self.place_type(p, e.span)?;
                Some(SimpleType::MutRef(Box::new(t)))
            }
            ExprKind::Move(p) => self.place_type(p, e.span),
        }
    }
}
