//! Resource-aware big-step evaluation.
//!
//! Expressions are resource-free and never modify the store. Statements
//! execute with a signed cost; `tick` is the only statement that incurs
//! cost. Function application binds the callee's parameters, locals and
//! return variable in a fresh activation frame of the flat store, runs
//! the body, reads the return variable, clears the frame, and writes the
//! result to the destination place.

use crate::syntax::{BinOp, Block, Expr, ExprKind, Function, Place, Program, Stmt, StmtKind, RET};

use super::value::{ListVal, RtPlace, RuntimeError, Store, Value};

/// Trace callback: invoked before each statement executes, with the
/// cost accumulated so far.
pub type TraceHook<'a> = Box<dyn FnMut(&Stmt, i64) + 'a>;

/// One evaluation of a program, owning the store, the fuel budget, and
/// the cost accumulator.
pub struct Interp<'p> {
    program: &'p Program,
    pub store: Store,
    fuel: u64,
    cost: i64,
    next_frame: u32,
    call_depth: u32,
    trace: Option<TraceHook<'p>>,
}

/// Frame used for caller-side scaffolding (hidden owner slots).
pub const OWNER_FRAME: u32 = 0;
/// Frame in which the entry function's variables are bound.
pub const ENTRY_FRAME: u32 = 1;

pub const DEFAULT_FUEL: u64 = 10_000_000;

// Runaway recursion guard, complementing the statement fuel: bounds the
// host memory spent on object-language call frames. Reported as fuel
// exhaustion since it plays the same role.
const CALL_DEPTH_CAP: u32 = 10_000;

impl<'p> Interp<'p> {
    pub fn new(program: &'p Program, fuel: u64) -> Self {
        Interp {
            program,
            store: Store::new(),
            fuel,
            cost: 0,
            next_frame: ENTRY_FRAME + 1,
            call_depth: 0,
            trace: None,
        }
    }

    pub fn set_trace(&mut self, hook: TraceHook<'p>) {
        self.trace = Some(hook);
    }

    pub fn cost(&self) -> i64 {
        self.cost
    }

    /// Bind the entry function's variables in the entry frame: parameters
    /// to the given argument values, locals and `ret` to undefined.
    pub fn bind_entry(&mut self, f: &Function, args: Vec<Value>) -> Result<(), RuntimeError> {
        if args.len() != f.params.len() {
            return Err(RuntimeError::ShapeError(format!(
                "`{}` takes {} argument(s), got {}",
                f.name,
                f.params.len(),
                args.len()
            )));
        }
        for ((name, _), v) in f.params.iter().zip(args) {
            self.store.set_var(ENTRY_FRAME, name, v);
        }
        for decl in f.locals() {
            self.store.set_var(ENTRY_FRAME, &decl.name, Value::Undef);
        }
        self.store.set_var(ENTRY_FRAME, RET, Value::Undef);
        Ok(())
    }

    /// Execute the entry function's body in the entry frame.
    pub fn exec_entry(&mut self, f: &Function) -> Result<(), RuntimeError> {
        self.exec_block(ENTRY_FRAME, &f.body)
    }

    pub fn eval_expr(&self, frame: u32, e: &Expr) -> Result<Value, RuntimeError> {
        match &e.kind {
            ExprKind::IntLit(n) => Ok(Value::Int(*n)),
            ExprKind::True => Ok(Value::BoolV(true)),
            ExprKind::False => Ok(Value::BoolV(false)),
            ExprKind::Nil => Ok(Value::ListV(ListVal::Nil)),
            ExprKind::Boxed(inner) => {
                let v = self.eval_expr(frame, inner)?;
                Ok(Value::BoxV(Box::new(v)))
            }
            ExprKind::BinOp(op, lhs, rhs) => {
                let l = self.eval_int(frame, lhs)?;
                let r = self.eval_int(frame, rhs)?;
                Ok(match op {
                    BinOp::Add => Value::Int(l.checked_add(r).ok_or(RuntimeError::Overflow)?),
                    BinOp::Sub => Value::Int(l.checked_sub(r).ok_or(RuntimeError::Overflow)?),
                    BinOp::Mul => Value::Int(l.checked_mul(r).ok_or(RuntimeError::Overflow)?),
                    BinOp::Lt => Value::BoolV(l < r),
                    BinOp::Le => Value::BoolV(l <= r),
                    BinOp::EqEq => Value::BoolV(l == r),
                })
            }
            ExprKind::Copy(p) | ExprKind::Move(p) => self.read_place(frame, p),
            // Both borrow modes produce the same borrow value; modes are
            // not tracked at runtime.
            ExprKind::BorrowShared(p) | ExprKind::BorrowMut(p) => {
                let v = self.read_place(frame, p)?;
                Ok(Value::Borrow(RtPlace::from_place(frame, p), Box::new(v)))
            }
        }
    }

    fn eval_int(&self, frame: u32, e: &Expr) -> Result<i64, RuntimeError> {
        match self.eval_expr(frame, e)? {
            Value::Int(n) => Ok(n),
            other => Err(RuntimeError::ShapeError(format!(
                "arithmetic operand is {}, expected an integer",
                other
            ))),
        }
    }

    pub fn read_place(&self, frame: u32, p: &Place) -> Result<Value, RuntimeError> {
        self.store.read(&RtPlace::from_place(frame, p))
    }

    fn write_place(&mut self, frame: u32, p: &Place, v: Value) -> Result<(), RuntimeError> {
        self.store.write(&RtPlace::from_place(frame, p), v)
    }

    pub fn exec_block(&mut self, frame: u32, b: &Block) -> Result<(), RuntimeError> {
        for s in &b.stmts {
            self.exec_stmt(frame, s)?;
        }
        Ok(())
    }

    pub fn exec_stmt(&mut self, frame: u32, s: &Stmt) -> Result<(), RuntimeError> {
        // Recursion depth tracks the object program's call depth; grow the
        // host stack instead of overflowing it.
        stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || self.exec_stmt_inner(frame, s))
    }

    fn exec_stmt_inner(&mut self, frame: u32, s: &Stmt) -> Result<(), RuntimeError> {
        if self.fuel == 0 {
            return Err(RuntimeError::FuelExhausted);
        }
        self.fuel -= 1;
        if let Some(hook) = self.trace.as_mut() {
            hook(s, self.cost);
        }
        match &s.kind {
            StmtKind::Tick(delta) => {
                self.cost = self
                    .cost
                    .checked_add(*delta)
                    .ok_or(RuntimeError::Overflow)?;
                Ok(())
            }
            StmtKind::Return => Ok(()),
            // Drop does nothing: writes through borrows are eager, so
            // there is nothing to restore when a borrow ends.
            StmtKind::Drop(_) => Ok(()),
            StmtKind::Assign(p, e) => {
                let v = self.eval_expr(frame, e)?;
                self.write_place(frame, p, v)
            }
            StmtKind::AssignCons(p, head, tail) => {
                let hd = match self.eval_expr(frame, head)? {
                    Value::Int(n) => n,
                    other => {
                        return Err(RuntimeError::ShapeError(format!(
                            "cons head is {}, expected an integer",
                            other
                        )))
                    }
                };
                let tl = match self.eval_expr(frame, tail)? {
                    v @ Value::BoxV(_) => v,
                    other => {
                        return Err(RuntimeError::ShapeError(format!(
                            "cons tail is {}, expected a box",
                            other
                        )))
                    }
                };
                self.write_place(frame, p, Value::ListV(ListVal::Cons(hd, Box::new(tl))))
            }
            StmtKind::If(cond, then_arm, else_arm) => {
                match self.read_place(frame, cond)? {
                    Value::BoolV(true) => self.exec_block(frame, then_arm),
                    Value::BoolV(false) => self.exec_block(frame, else_arm),
                    other => Err(RuntimeError::ShapeError(format!(
                        "if condition is {}, expected a boolean",
                        other
                    ))),
                }
            }
            StmtKind::Match {
                scrutinee,
                nil_arm,
                hd,
                tl,
                cons_arm,
            } => match self.read_place(frame, scrutinee)? {
                Value::ListV(ListVal::Nil) => self.exec_block(frame, nil_arm),
                Value::ListV(ListVal::Cons(head, tail)) => {
                    self.write_place(frame, scrutinee, Value::Undef)?;
                    self.store.set_var(frame, hd, Value::Int(head));
                    self.store.set_var(frame, tl, *tail);
                    self.exec_block(frame, cons_arm)?;
                    let head_after = match self.store.get_var(frame, hd) {
                        Value::Int(n) => n,
                        other => {
                            return Err(RuntimeError::ShapeError(format!(
                                "match binder `{}` holds {} at arm end, expected an integer",
                                hd, other
                            )))
                        }
                    };
                    let tail_after = match self.store.get_var(frame, tl) {
                        v @ Value::BoxV(_) => v,
                        other => {
                            return Err(RuntimeError::ShapeError(format!(
                                "match binder `{}` holds {} at arm end, expected a box",
                                tl, other
                            )))
                        }
                    };
                    self.store.set_var(frame, hd, Value::Undef);
                    self.store.set_var(frame, tl, Value::Undef);
                    self.write_place(
                        frame,
                        scrutinee,
                        Value::ListV(ListVal::Cons(head_after, Box::new(tail_after))),
                    )
                }
                Value::Undef => Err(RuntimeError::UndefRead(format!(
                    "match scrutinee {} is undefined",
                    scrutinee
                ))),
                other => Err(RuntimeError::ShapeError(format!(
                    "match scrutinee is {}, expected a list",
                    other
                ))),
            },
            StmtKind::AssignCall(dest, callee, args) => {
                let f = self
                    .program
                    .function(callee)
                    .ok_or_else(|| RuntimeError::UnknownFunction(callee.clone()))?;
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_expr(frame, a)?);
                }
                if vals.len() != f.params.len() {
                    return Err(RuntimeError::ShapeError(format!(
                        "`{}` takes {} argument(s), got {}",
                        callee,
                        f.params.len(),
                        vals.len()
                    )));
                }
                if self.call_depth >= CALL_DEPTH_CAP {
                    return Err(RuntimeError::FuelExhausted);
                }
                self.call_depth += 1;
                let callee_frame = self.next_frame;
                self.next_frame += 1;
                for ((name, _), v) in f.params.iter().zip(vals) {
                    self.store.set_var(callee_frame, name, v);
                }
                for decl in f.locals() {
                    self.store.set_var(callee_frame, &decl.name, Value::Undef);
                }
                self.store.set_var(callee_frame, RET, Value::Undef);
                let body_result = self.exec_block(callee_frame, &f.body);
                self.call_depth -= 1;
                body_result?;
                let ret_val = self.store.get_var(callee_frame, RET);
                for (name, _) in &f.params {
                    self.store.clear_var(callee_frame, name);
                }
                for decl in f.locals() {
                    self.store.clear_var(callee_frame, &decl.name);
                }
                self.store.clear_var(callee_frame, RET);
                self.write_place(frame, dest, ret_val)
            }
        }
    }
}

/// Run a function on the given argument values in a fresh store,
/// returning the value of `ret` and the total cost of the call tree.
pub fn run_function(
    program: &Program,
    name: &str,
    args: Vec<Value>,
    fuel: u64,
) -> Result<(Value, i64), RuntimeError> {
    let f = program
        .function(name)
        .ok_or_else(|| RuntimeError::UnknownFunction(name.to_string()))?;
    let mut interp = Interp::new(program, fuel);
    interp.bind_entry(f, args)?;
    interp.exec_entry(f)?;
    let ret = interp.store.get_var(ENTRY_FRAME, RET);
    Ok((ret, interp.cost()))
}
