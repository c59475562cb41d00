//! Constraint-emitting type checking of expressions and statements.

use std::collections::BTreeSet;

use crate::annot::{
    equate, meet, prophesy, share, wellformed, AnnotError, RichType, Session, VarKind,
};
use crate::lp::{rat, Constraint, LinExpr};
use crate::syntax::{Block, Expr, ExprKind, Span, Stmt, StmtKind, RET};

use super::ctx::{TypeError, TypingContext};
use super::{instantiate_signature, CheckEnv};

/// Type one expression in a context, emitting constraints into the
/// session and threading the context to its remainder. `site` prefixes
/// the provenance notes of whatever the expression emits.
pub fn type_expr(
    ctx: &mut TypingContext,
    e: &Expr,
    session: &mut Session,
    site: &str,
) -> Result<RichType, TypeError> {
    let shape_of = |t: &RichType| {
        t.erase()
            .map(|t| t.to_string())
            .unwrap_or_else(|| "bot".into())
    };
    let annot_err = |err: AnnotError, span: Span| match err {
        AnnotError::NoShareOfMut => TypeError::ShareOfMut { span },
        AnnotError::Shape(a, b) => {
            TypeError::shape(format!("shape mismatch between `{}` and `{}`", a, b), span)
        }
    };
    match &e.kind {
        ExprKind::IntLit(_) => Ok(RichType::IntR),
        ExprKind::True | ExprKind::False => Ok(RichType::BoolR),
        ExprKind::Nil => {
            let a = session.fresh(VarKind::Potential, &format!("nil_{}_{}", site, e.span));
            Ok(RichType::ListR(a))
        }
        ExprKind::Boxed(inner) => match type_expr(ctx, inner, session, site)? {
            RichType::ListR(a) => Ok(RichType::BoxListR(a)),
            other => Err(TypeError::shape(
                format!("`box` payload must be a list, got `{}`", shape_of(&other)),
                e.span,
            )),
        },
        ExprKind::BinOp(op, lhs, rhs) => {
            for side in [lhs, rhs] {
                match type_expr(ctx, side, session, site)? {
                    RichType::IntR => {}
                    other => {
                        return Err(TypeError::shape(
                            format!(
                                "operand of `{}` must be an integer, got `{}`",
                                op,
                                shape_of(&other)
                            ),
                            side.span,
                        ))
                    }
                }
            }
            Ok(if op.is_comparison() {
                RichType::BoolR
            } else {
                RichType::IntR
            })
        }
        ExprKind::Copy(p) => match ctx.read(p, e.span)? {
            t @ (RichType::IntR | RichType::BoolR) => Ok(t),
            _ => Err(TypeError::CopyNonAtom { span: e.span }),
        },
        ExprKind::Move(p) => {
            let t = ctx.read(p, e.span)?;
            let note = format!("move_{}_{}", site, e.span);
            let cs = ctx.write(p, RichType::Bot, e.span, &note)?;
            session.emit_all(cs);
            Ok(t)
        }
        ExprKind::BorrowShared(p) => {
            let t = ctx.read(p, e.span)?;
            let note = format!("share_{}_{}", site, e.span);
            let (kept, lent, cs) = share(&t, session, &note).map_err(|err| annot_err(err, e.span))?;
            session.emit_all(cs);
            let cs = ctx.write(p, kept, e.span, &note)?;
            session.emit_all(cs);
            Ok(RichType::shared(lent))
        }
        ExprKind::BorrowMut(p) => {
            let t = ctx.read(p, e.span)?;
            let note = format!("prophecy_{}_{}", site, e.span);
            let promised = prophesy(&t, session, &note);
            let cs = ctx.write(p, promised.clone(), e.span, &note)?;
            session.emit_all(cs);
            Ok(RichType::mutable(t, promised))
        }
    }
}

pub(super) struct Checker<'a, 'p> {
    pub env: &'a mut CheckEnv<'p>,
    pub fn_name: String,
    /// Functions in the group currently being analyzed; calls to these
    /// use the shared signature directly instead of a clone.
    pub group: BTreeSet<String>,
    pub ctx: TypingContext,
}

impl<'a, 'p> Checker<'a, 'p> {
    fn site(&self, span: Span) -> String {
        format!("{}:{}", self.fn_name, span)
    }

    fn shape_of(t: &RichType) -> String {
        t.erase()
            .map(|t| t.to_string())
            .unwrap_or_else(|| "bot".into())
    }

    fn annot_err(&self, e: AnnotError, span: Span) -> TypeError {
        match e {
            AnnotError::NoShareOfMut => TypeError::ShareOfMut { span },
            AnnotError::Shape(a, b) => {
                TypeError::shape(format!("shape mismatch between `{}` and `{}`", a, b), span)
            }
        }
    }

    pub fn type_expr(&mut self, e: &Expr) -> Result<RichType, TypeError> {
        let site = self.fn_name.clone();
        type_expr(&mut self.ctx, e, &mut self.env.session, &site)
    }

    pub fn type_block(&mut self, b: &Block) -> Result<LinExpr, TypeError> {
        let mut total = LinExpr::zero();
        for s in &b.stmts {
            total = total.plus(&self.type_stmt(s)?);
        }
        Ok(total)
    }

    pub fn type_stmt(&mut self, s: &Stmt) -> Result<LinExpr, TypeError> {
        match &s.kind {
            StmtKind::Tick(d) => Ok(LinExpr::constant(rat(*d))),
            StmtKind::Return => Ok(LinExpr::zero()),
            StmtKind::Drop(p) => {
                let t = self.ctx.read(p, s.span)?;
                let site = format!("drop_{}", self.site(s.span));
                self.env.session.emit_all(wellformed(&t, &site));
                let cs = self.ctx.write(p, RichType::Bot, s.span, &site)?;
                self.env.session.emit_all(cs);
                Ok(LinExpr::zero())
            }
            StmtKind::Assign(p, e) => {
                let new = self.type_expr(e)?;
                let old = self.ctx.read(p, s.span)?;
                let site = format!("assign_{}", self.site(s.span));
                self.env.session.emit_all(wellformed(&old, &site));
                let cs = self.ctx.write(p, new, s.span, &site)?;
                self.env.session.emit_all(cs);
                Ok(LinExpr::zero())
            }
            StmtKind::AssignCons(p, head, tail) => {
                match self.type_expr(head)? {
                    RichType::IntR => {}
                    other => {
                        return Err(TypeError::shape(
                            format!(
                                "cons head must be an integer, got `{}`",
                                Self::shape_of(&other)
                            ),
                            head.span,
                        ))
                    }
                }
                let tail_annot = match self.type_expr(tail)? {
                    RichType::BoxListR(a) => a,
                    other => {
                        return Err(TypeError::shape(
                            format!(
                                "cons tail must be a boxed list, got `{}`",
                                Self::shape_of(&other)
                            ),
                            tail.span,
                        ))
                    }
                };
                let site = format!("cons_{}", self.site(s.span));
                let cs = self.ctx.write(p, RichType::ListR(tail_annot), s.span, &site)?;
                self.env.session.emit_all(cs);
                // Building a cons cell pays the element's potential as
                // continuation payment.
                Ok(LinExpr::var(tail_annot))
            }
            StmtKind::If(cond, then_arm, else_arm) => {
                match self.ctx.read(cond, s.span)? {
                    RichType::BoolR => {}
                    other => {
                        return Err(TypeError::shape(
                            format!(
                                "`if` condition must be a boolean, got `{}`",
                                Self::shape_of(&other)
                            ),
                            s.span,
                        ))
                    }
                }
                let entry = self.ctx.clone();
                let then_delta = self.type_block(then_arm)?;
                let then_ctx = std::mem::replace(&mut self.ctx, entry);
                let else_delta = self.type_block(else_arm)?;
                let else_ctx = self.ctx.clone();
                self.ctx = self.merge_contexts(&then_ctx, &else_ctx, s.span)?;
                Ok(self.branch_delta(&[then_delta, else_delta], s.span, "if"))
            }
            StmtKind::Match {
                scrutinee,
                nil_arm,
                hd,
                tl,
                cons_arm,
            } => {
                let scrutinee_annot = match self.ctx.read(scrutinee, s.span)? {
                    RichType::ListR(a) => a,
                    other => {
                        return Err(TypeError::shape(
                            format!(
                                "`match` scrutinee must be a list, got `{}`",
                                Self::shape_of(&other)
                            ),
                            s.span,
                        ))
                    }
                };
                let entry = self.ctx.clone();
                let nil_delta = self.type_block(nil_arm)?;
                let nil_ctx = std::mem::replace(&mut self.ctx, entry);

                // Bind: the scrutinee moves out, the binders take the
                // head and tail at the scrutinee's annotation.
                let site = format!("mat_{}", self.site(s.span));
                let cs = self.ctx.write(scrutinee, RichType::Bot, s.span, &site)?;
                self.env.session.emit_all(cs);
                self.ctx.insert(hd.clone(), RichType::IntR);
                self.ctx.insert(tl.clone(), RichType::BoxListR(scrutinee_annot));
                let cons_delta = self.type_block(cons_arm)?;
                let rest_annot = match self.ctx.get(tl) {
                    Some(RichType::BoxListR(b)) => *b,
                    other => {
                        return Err(TypeError::MatchBinder {
                            message: format!(
                                "match binder `{}` must hold a boxed list at the end of the arm, got `{}`",
                                tl,
                                other.map(Self::shape_of).unwrap_or_default()
                            ),
                            span: s.span,
                        })
                    }
                };
                self.ctx.insert(hd.clone(), RichType::Bot);
                self.ctx.insert(tl.clone(), RichType::Bot);
                let cs = self
                    .ctx
                    .write(scrutinee, RichType::ListR(rest_annot), s.span, &site)?;
                self.env.session.emit_all(cs);
                let cons_ctx = self.ctx.clone();

                self.ctx = self.merge_contexts(&nil_ctx, &cons_ctx, s.span)?;
                // The cons branch gains the difference between the
                // potential peeled off the scrutinee and what is left on
                // the tail.
                let cons_net = cons_delta
                    .minus(&LinExpr::var(scrutinee_annot))
                    .plus(&LinExpr::var(rest_annot));
                Ok(self.branch_delta(&[nil_delta, cons_net], s.span, "mat"))
            }
            StmtKind::AssignCall(p, callee, args) => {
                if self.env.program.function(callee).is_none() {
                    return Err(TypeError::UnknownFunction {
                        name: callee.clone(),
                        span: s.span,
                    });
                }
                let site = format!("call_{}_{}", callee, self.site(s.span));
                let (param_types, ret_type, delta) = if self.group.contains(callee) {
                    let sig = &self.env.signatures[callee];
                    let params = sig
                        .param_names
                        .iter()
                        .map(|n| sig.entry.get(n).expect("signature domain").clone())
                        .collect::<Vec<_>>();
                    let ret = sig.entry.get(RET).expect("signature domain").clone();
                    (params, ret, sig.delta)
                } else {
                    let cloned = instantiate_signature(self.env, callee, &site);
                    (cloned.params, cloned.ret, cloned.delta)
                };
                if args.len() != param_types.len() {
                    return Err(TypeError::shape(
                        format!(
                            "`{}` takes {} argument(s), got {}",
                            callee,
                            param_types.len(),
                            args.len()
                        ),
                        s.span,
                    ));
                }
                for (arg, param_ty) in args.iter().zip(&param_types) {
                    let arg_ty = self.type_expr(arg)?;
                    let cs = equate(&arg_ty, param_ty, &site)
                        .map_err(|err| self.annot_err(err, arg.span))?;
                    self.env.session.emit_all(cs);
                }
                let old = self.ctx.read(p, s.span)?;
                self.env.session.emit_all(wellformed(&old, &site));
                let cs = self.ctx.write(p, ret_type, s.span, &site)?;
                self.env.session.emit_all(cs);
                Ok(LinExpr::var(delta))
            }
        }
    }

    /// Fresh cost variable bounded below by each branch's cost; the
    /// linear relaxation of the branch maximum.
    fn branch_delta(&mut self, branches: &[LinExpr], span: Span, which: &str) -> LinExpr {
        let d = self.env.session.fresh(
            VarKind::Cost,
            &format!("{which}_delta_{}", self.site(span)),
        );
        for b in branches {
            self.env.session.emit(Constraint::le(
                b.clone(),
                LinExpr::var(d),
                format!("{which}-delta@{}", self.site(span)),
            ));
        }
        LinExpr::var(d)
    }

    fn merge_contexts(
        &mut self,
        left: &TypingContext,
        right: &TypingContext,
        span: Span,
    ) -> Result<TypingContext, TypeError> {
        let mut merged = TypingContext::new();
        for (name, lt) in left.iter() {
            let rt = right.get(name).expect("merge domains agree");
            let note = format!("merge_{}_{}", name, self.site(span));
            let (t, cs) = meet(lt, rt, &mut self.env.session, &note)
                .map_err(|err| self.annot_err(err, span))?;
            self.env.session.emit_all(cs);
            merged.insert(name.clone(), t);
        }
        Ok(merged)
    }
}
