//! Pretty-printer producing surface syntax that reparses to the same AST.

use std::fmt::Write;

use super::ast::*;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, f) in p.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_function(&mut out, f);
    }
    out
}

fn print_function(out: &mut String, f: &Function) {
    write!(out, "fn {}(", f.name).unwrap();
    for (i, (name, ty)) in f.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{}: {}", name, ty).unwrap();
    }
    writeln!(out, ") -> {} {{", f.ret).unwrap();
    print_block_body(out, &f.body, 1);
    out.push_str("}\n");
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_block_body(out: &mut String, b: &Block, level: usize) {
    for decl in &b.lets {
        indent(out, level);
        writeln!(out, "let {}: {};", decl.name, decl.ty).unwrap();
    }
    for s in &b.stmts {
        indent(out, level);
        print_stmt(out, s, level);
        out.push_str(";\n");
    }
}

fn print_block(out: &mut String, b: &Block, level: usize) {
    out.push_str("{\n");
    print_block_body(out, b, level + 1);
    indent(out, level);
    out.push('}');
}

fn print_stmt(out: &mut String, s: &Stmt, level: usize) {
    match &s.kind {
        StmtKind::Tick(n) => {
            write!(out, "tick({})", n).unwrap();
        }
        StmtKind::Return => out.push_str("return"),
        StmtKind::Drop(p) => {
            write!(out, "drop {}", p).unwrap();
        }
        StmtKind::If(cond, then_arm, else_arm) => {
            write!(out, "if {} ", cond).unwrap();
            print_block(out, then_arm, level);
            out.push_str(" else ");
            print_block(out, else_arm, level);
        }
        StmtKind::Match {
            scrutinee,
            nil_arm,
            hd,
            tl,
            cons_arm,
        } => {
            write!(out, "match {} {{\n", scrutinee).unwrap();
            indent(out, level + 1);
            out.push_str("nil => ");
            print_block(out, nil_arm, level + 1);
            out.push_str(",\n");
            indent(out, level + 1);
            write!(out, "cons({}, {}) => ", hd, tl).unwrap();
            print_block(out, cons_arm, level + 1);
            out.push('\n');
            indent(out, level);
            out.push('}');
        }
        StmtKind::Assign(p, e) => {
            write!(out, "{} := {}", p, print_expr(e)).unwrap();
        }
        StmtKind::AssignCons(p, head, tail) => {
            write!(out, "{} := cons({}, {})", p, print_expr(head), print_expr(tail)).unwrap();
        }
        StmtKind::AssignCall(p, callee, args) => {
            let rendered: Vec<String> = args.iter().map(print_expr).collect();
            write!(out, "{} := {}({})", p, callee, rendered.join(", ")).unwrap();
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::IntLit(n) => n.to_string(),
        ExprKind::True => "true".into(),
        ExprKind::False => "false".into(),
        ExprKind::Nil => "nil".into(),
        ExprKind::Boxed(inner) => format!("box({})", print_expr(inner)),
        ExprKind::BinOp(op, lhs, rhs) => {
            format!("{} {} {}", print_expr(lhs), op, print_expr(rhs))
        }
        ExprKind::Copy(p) => format!("copy {}", p),
        ExprKind::BorrowShared(p) => format!("&{}", p),
        ExprKind::BorrowMut(p) => format!("&mut {}", p),
        ExprKind::Move(p) => format!("move {}", p),
    }
}

pub fn print_stmt_line(s: &Stmt) -> String {
    let mut out = String::new();
    match &s.kind {
        StmtKind::If(cond, ..) => {
            write!(out, "if {} ...", cond).unwrap();
        }
        StmtKind::Match { scrutinee, .. } => {
            write!(out, "match {} ...", scrutinee).unwrap();
        }
        _ => print_stmt(&mut out, s, 0),
    }
    out
}
