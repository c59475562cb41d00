//! Linear resource-bound analysis for a small borrow calculus.
//!
//! The input language (`.rabc` files) is an imperative calculus with
//! integer lists, explicit boxing, shared and mutable borrows, and
//! `tick(n)` statements as the sole source of resource consumption.
//! The library
//!
//! - parses and validates programs ([`syntax`]),
//! - runs them under a resource-counting big-step interpreter ([`interp`]),
//! - infers per-function linear cost bounds by collecting linear
//!   constraints over potential annotations and solving them with an
//!   exact-rational simplex ([`annot`], [`infer`], [`lp`]),
//! - and validates inferred bounds against measured costs ([`harness`]).

pub mod annot;
pub mod cli;
pub mod harness;
pub mod infer;
pub mod interp;
pub mod lp;
pub mod report;
pub mod syntax;

pub use annot::{RichType, Session, VarId, VarKind};
pub use infer::{analyze, analyze_with, AnalysisResult, Signature, TypingContext};
pub use interp::{ListVal, RuntimeError, Store, Value};
pub use lp::{Assignment, Constraint, LinExpr, LpError, LpProblem, Rat, Relation};
pub use syntax::{Block, Expr, Function, ParseError, Place, Program, SimpleType, Stmt};
