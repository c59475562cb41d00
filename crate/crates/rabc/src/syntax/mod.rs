//! Surface grammar, abstract syntax, validation, and call-graph
//! construction.

mod ast;
mod graph;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::{
    BinOp, Block, Expr, ExprKind, Function, LocalDecl, Place, Program, SimpleType, Span, Stmt,
    StmtKind, RET,
};
pub use graph::{call_graph, call_graph_sccs};
pub use parser::{parse, ParseError, ParseResult};
pub use printer::{print_expr, print_program, print_stmt_line};
pub use validate::{validate, ValidationReport, Violation};
