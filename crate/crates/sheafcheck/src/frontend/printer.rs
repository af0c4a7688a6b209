//! Canonical pretty-printer. `parse(print(m))` is structurally identical
//! to `m` (line numbers and node ids aside).

use super::ast::*;
use std::fmt::Write;

pub fn print_module(m: &Module) -> String {
    let mut out = String::new();
    for (i, f) in m.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_function(&mut out, f);
    }
    out
}

pub fn print_function(out: &mut String, f: &FunctionDef) {
    let _ = writeln!(out, "def {}({}):", f.name, f.params.join(", "));
    print_body(out, &f.body, 1);
}

fn print_body(out: &mut String, body: &[Stmt], depth: usize) {
    for stmt in body {
        print_stmt(out, stmt, depth);
    }
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    let pad = "    ".repeat(depth);
    match &stmt.kind {
        StmtKind::Assign { targets, value } => {
            let lhs = targets.iter().map(target_str).collect::<Vec<_>>().join(", ");
            let _ = writeln!(out, "{pad}{lhs} = {}", expr_str(value));
        }
        StmtKind::AugAssign { target, op, value } => {
            let _ = writeln!(out, "{pad}{} {}= {}", target_str(target), op.symbol(), expr_str(value));
        }
        StmtKind::If { cond, then_body, else_body } => {
            let _ = writeln!(out, "{pad}if {}:", expr_str(cond));
            print_body(out, then_body, depth + 1);
            if !else_body.is_empty() {
                let _ = writeln!(out, "{pad}else:");
                print_body(out, else_body, depth + 1);
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "{pad}while {}:", expr_str(cond));
            print_body(out, body, depth + 1);
        }
        StmtKind::ForRange { var, args, body } => {
            let args = args.iter().map(expr_str).collect::<Vec<_>>().join(", ");
            let _ = writeln!(out, "{pad}for {var} in range({args}):");
            print_body(out, body, depth + 1);
        }
        StmtKind::ForList { var, iter, body } => {
            let _ = writeln!(out, "{pad}for {var} in {}:", expr_str(iter));
            print_body(out, body, depth + 1);
        }
        StmtKind::Return { value } => match value {
            Some(v) => {
                let _ = writeln!(out, "{pad}return {}", expr_str(v));
            }
            None => {
                let _ = writeln!(out, "{pad}return");
            }
        },
        StmtKind::Assert { cond } => {
            let _ = writeln!(out, "{pad}assert {}", expr_str(cond));
        }
        StmtKind::Pass => {
            let _ = writeln!(out, "{pad}pass");
        }
        StmtKind::ExprStmt { value } => {
            let _ = writeln!(out, "{pad}{}", expr_str(value));
        }
    }
}

fn target_str(t: &Target) -> String {
    match t {
        Target::Name(n) => n.clone(),
        Target::Index { base, index } => format!("{base}[{}]", expr_str(index)),
    }
}

/// Precedence levels, loosest first. Parenthesization is driven by these so
/// the printed form reparses with the same structure.
fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Tuple(_) => 0,
        ExprKind::BoolOr { .. } => 1,
        ExprKind::BoolAnd { .. } => 2,
        ExprKind::Not(_) => 3,
        ExprKind::Compare { .. } => 4,
        ExprKind::Binary { op: BinOp::Add | BinOp::Sub, .. } => 5,
        ExprKind::Binary { .. } => 6,
        ExprKind::Neg(_) => 7,
        _ => 8,
    }
}

pub fn expr_str(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Bool(true) => "True".into(),
        ExprKind::Bool(false) => "False".into(),
        ExprKind::NoneLit => "None".into(),
        ExprKind::Var(n) => n.clone(),
        ExprKind::Binary { op, left, right } => {
            let p = prec(e);
            format!("{} {} {}", sub(left, p), op.symbol(), sub_right(right, p))
        }
        ExprKind::Compare { op, left, right } => {
            let p = prec(e);
            format!("{} {} {}", sub(left, p + 1), op.symbol(), sub(right, p + 1))
        }
        ExprKind::BoolAnd { left, right } => {
            let p = prec(e);
            format!("{} and {}", sub(left, p), sub_right(right, p))
        }
        ExprKind::BoolOr { left, right } => {
            let p = prec(e);
            format!("{} or {}", sub(left, p), sub_right(right, p))
        }
        ExprKind::Not(inner) => format!("not {}", sub(inner, prec(e))),
        ExprKind::Neg(inner) => format!("-{}", sub(inner, prec(e))),
        ExprKind::Call { callee, args } => {
            let args = args.iter().map(expr_str).collect::<Vec<_>>().join(", ");
            format!("{callee}({args})")
        }
        ExprKind::MethodCall { recv, method, args } => {
            let args = args.iter().map(expr_str).collect::<Vec<_>>().join(", ");
            format!("{}.{method}({args})", sub(recv, 8))
        }
        ExprKind::Index { base, index } => format!("{}[{}]", sub(base, 8), expr_str(index)),
        ExprKind::Slice { base, lo, hi } => {
            let lo = lo.as_ref().map(|e| expr_str(e)).unwrap_or_default();
            let hi = hi.as_ref().map(|e| expr_str(e)).unwrap_or_default();
            format!("{}[{lo}:{hi}]", sub(base, 8))
        }
        ExprKind::ListLit(items) => {
            let items = items.iter().map(expr_str).collect::<Vec<_>>().join(", ");
            format!("[{items}]")
        }
        ExprKind::ListComp { elem, var, iter, cond } => match cond {
            Some(c) => format!(
                "[{} for {var} in {} if {}]",
                expr_str(elem),
                expr_str(iter),
                expr_str(c)
            ),
            None => format!("[{} for {var} in {}]", expr_str(elem), expr_str(iter)),
        },
        ExprKind::Tuple(items) => {
            items.iter().map(expr_str).collect::<Vec<_>>().join(", ")
        }
    }
}

fn sub(e: &Expr, parent_prec: u8) -> String {
    if prec(e) < parent_prec {
        format!("({})", expr_str(e))
    } else {
        expr_str(e)
    }
}

/// Right operand of a left-associative operator: parenthesize equal
/// precedence too, so `a - (b - c)` survives the round trip.
fn sub_right(e: &Expr, parent_prec: u8) -> String {
    if prec(e) <= parent_prec {
        match &e.kind {
            ExprKind::Binary { .. } | ExprKind::BoolAnd { .. } | ExprKind::BoolOr { .. } => {
                format!("({})", expr_str(e))
            }
            _ => sub(e, parent_prec),
        }
    } else {
        expr_str(e)
    }
}
