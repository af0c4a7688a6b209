//! Crude type inference for MiniLang: enough to type parameters for input
//! generation, pick enumeration domains, and spot possibly-None values.

use std::collections::BTreeMap;

use super::ast::*;
use super::dataflow::{DataflowGraph, DefKind, Key};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BaseTy {
    Int,
    Bool,
    List,
    NoneOnly,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ty {
    pub base: BaseTy,
    pub may_none: bool,
}

impl Ty {
    pub const fn int() -> Ty {
        Ty { base: BaseTy::Int, may_none: false }
    }
    pub const fn bool() -> Ty {
        Ty { base: BaseTy::Bool, may_none: false }
    }
    pub const fn list() -> Ty {
        Ty { base: BaseTy::List, may_none: false }
    }
    pub const fn none() -> Ty {
        Ty { base: BaseTy::NoneOnly, may_none: true }
    }
    pub const fn any() -> Ty {
        Ty { base: BaseTy::Any, may_none: false }
    }

    pub fn join(self, other: Ty) -> Ty {
        let may_none = self.may_none
            || other.may_none
            || self.base == BaseTy::NoneOnly
            || other.base == BaseTy::NoneOnly;
        let base = match (self.base, other.base) {
            (a, b) if a == b => a,
            (BaseTy::NoneOnly, b) => b,
            (a, BaseTy::NoneOnly) => a,
            (BaseTy::Bool, BaseTy::Int) | (BaseTy::Int, BaseTy::Bool) => BaseTy::Int,
            _ => BaseTy::Any,
        };
        Ty { base, may_none }
    }
}

#[derive(Debug, Clone)]
pub struct Signature {
    pub params: Vec<Ty>,
    pub ret: Ty,
}

#[derive(Debug, Clone, Default)]
pub struct ModuleTypes {
    pub signatures: BTreeMap<String, Signature>,
    /// Per-function SSA key types.
    pub key_types: BTreeMap<String, BTreeMap<Key, Ty>>,
}

impl ModuleTypes {
    pub fn key_ty(&self, func: &str, key: &Key) -> Ty {
        self.key_types
            .get(func)
            .and_then(|m| m.get(key))
            .copied()
            .unwrap_or(Ty::any())
    }
}

/// Infer parameter and return types by a small fixpoint over the module.
pub fn infer_types(m: &Module, dfgs: &BTreeMap<String, DataflowGraph>) -> ModuleTypes {
    let mut sigs: BTreeMap<String, Signature> = m
        .functions
        .iter()
        .map(|f| {
            (
                f.name.clone(),
                Signature { params: vec![Ty::any(); f.params.len()], ret: Ty::any() },
            )
        })
        .collect();

    // Parameter types from intra-function usage (stable across rounds).
    for f in &m.functions {
        let mut tys = vec![Ty::any(); f.params.len()];
        for (i, p) in f.params.iter().enumerate() {
            tys[i] = param_usage_ty(p, &f.body);
        }
        sigs.get_mut(&f.name).unwrap().params = tys;
    }

    let mut key_types: BTreeMap<String, BTreeMap<Key, Ty>> = BTreeMap::new();
    for _round in 0..4 {
        for f in &m.functions {
            let dfg = &dfgs[&f.name];
            let kt = infer_key_types(f, dfg, &sigs);
            let ret = return_ty(f, dfg, &kt, &sigs);
            sigs.get_mut(&f.name).unwrap().ret = ret;
            key_types.insert(f.name.clone(), kt);
        }
    }
    ModuleTypes { signatures: sigs, key_types }
}

fn param_usage_ty(param: &str, body: &[Stmt]) -> Ty {
    let mut votes_list = 0u32;
    let mut votes_int = 0u32;
    walk_stmts(body, &mut |e: &Expr| match &e.kind {
        ExprKind::Index { base, .. } | ExprKind::Slice { base, .. } => {
            if is_var(base, param) {
                votes_list += 1;
            }
        }
        ExprKind::Call { callee, args } => {
            if matches!(callee.as_str(), "len" | "sum" | "sorted" | "list" | "min" | "max")
                && args.first().map(|a| is_var(a, param)).unwrap_or(false)
            {
                votes_list += 1;
            }
            if callee == "abs" && args.first().map(|a| is_var(a, param)).unwrap_or(false) {
                votes_int += 1;
            }
            if callee == "range" && args.iter().any(|a| mentions_var(a, param)) {
                votes_int += 1;
            }
        }
        ExprKind::MethodCall { recv, .. } => {
            if is_var(recv, param) {
                votes_list += 1;
            }
        }
        ExprKind::Binary { left, right, .. } => {
            if is_var(left, param) || is_var(right, param) {
                votes_int += 1;
            }
        }
        ExprKind::Compare { left, right, .. } => {
            // Comparison against an int literal is an int vote.
            if (is_var(left, param) && matches!(right.kind, ExprKind::Int(_)))
                || (is_var(right, param) && matches!(left.kind, ExprKind::Int(_)))
            {
                votes_int += 1;
            }
        }
        ExprKind::Neg(x) => {
            if is_var(x, param) {
                votes_int += 1;
            }
        }
        _ => {}
    });
    // Iterating a parameter is a list vote.
    walk_for_iters(body, &mut |iter: &Expr| {
        if is_var(iter, param) {
            votes_list += 1;
        }
    });
    if votes_list > 0 && votes_int == 0 {
        Ty::list()
    } else if votes_int > 0 && votes_list == 0 {
        Ty::int()
    } else if votes_int > 0 && votes_list > 0 {
        Ty::any()
    } else {
        Ty::int() // default for unused/opaque parameters
    }
}

fn infer_key_types(
    f: &FunctionDef,
    dfg: &DataflowGraph,
    sigs: &BTreeMap<String, Signature>,
) -> BTreeMap<Key, Ty> {
    let mut out: BTreeMap<Key, Ty> = BTreeMap::new();
    // Two passes so phi sources defined later are seen.
    for _ in 0..2 {
        for key in &dfg.key_order {
            let info = &dfg.ssa_defs[key];
            let ty = match &info.kind {
                DefKind::Param { index } => sigs
                    .get(&f.name)
                    .and_then(|s| s.params.get(*index))
                    .copied()
                    .unwrap_or(Ty::any()),
                DefKind::Expr { expr, .. } => expr_ty(expr, &out, dfg, sigs),
                DefKind::AugAssign { prev, .. } => {
                    out.get(prev).copied().unwrap_or(Ty::int())
                }
                DefKind::Phi { sources } => {
                    let mut ty: Option<Ty> = None;
                    for s in sources {
                        if let Some(t) = out.get(s) {
                            ty = Some(match ty {
                                None => *t,
                                Some(acc) => acc.join(*t),
                            });
                        }
                    }
                    ty.unwrap_or(Ty::any())
                }
                DefKind::RangeIter { .. } => Ty::int(),
                DefKind::ListIter { .. } | DefKind::CompIter { .. } => Ty::int(),
                DefKind::ListStore { .. }
                | DefKind::ListAppend { .. }
                | DefKind::ListExtend { .. } => Ty::list(),
            };
            out.insert(key.clone(), ty);
        }
    }
    out
}

fn return_ty(
    f: &FunctionDef,
    dfg: &DataflowGraph,
    key_types: &BTreeMap<Key, Ty>,
    sigs: &BTreeMap<String, Signature>,
) -> Ty {
    let mut tys: Vec<Ty> = Vec::new();
    collect_return_tys(&f.body, dfg, key_types, sigs, &mut tys);
    // Falling off the end returns None.
    if !super::dataflow::always_returns(&f.body) {
        tys.push(Ty::none());
    }
    tys.into_iter().reduce(Ty::join).unwrap_or(Ty::none())
}

fn collect_return_tys(
    stmts: &[Stmt],
    dfg: &DataflowGraph,
    key_types: &BTreeMap<Key, Ty>,
    sigs: &BTreeMap<String, Signature>,
    out: &mut Vec<Ty>,
) {
    for s in stmts {
        match &s.kind {
            StmtKind::Return { value } => match value {
                Some(v) => out.push(expr_ty_resolved(v, key_types, dfg, sigs)),
                None => out.push(Ty::none()),
            },
            StmtKind::If { then_body, else_body, .. } => {
                collect_return_tys(then_body, dfg, key_types, sigs, out);
                collect_return_tys(else_body, dfg, key_types, sigs, out);
            }
            StmtKind::While { body, .. }
            | StmtKind::ForRange { body, .. }
            | StmtKind::ForList { body, .. } => {
                collect_return_tys(body, dfg, key_types, sigs, out);
            }
            _ => {}
        }
    }
}

fn expr_ty(
    e: &Expr,
    key_types: &BTreeMap<Key, Ty>,
    dfg: &DataflowGraph,
    sigs: &BTreeMap<String, Signature>,
) -> Ty {
    expr_ty_resolved(e, key_types, dfg, sigs)
}

pub fn expr_ty_resolved(
    e: &Expr,
    key_types: &BTreeMap<Key, Ty>,
    dfg: &DataflowGraph,
    sigs: &BTreeMap<String, Signature>,
) -> Ty {
    match &e.kind {
        ExprKind::Int(_) => Ty::int(),
        ExprKind::Bool(_) => Ty::bool(),
        ExprKind::NoneLit => Ty::none(),
        ExprKind::Var(_) => dfg
            .var_use
            .get(&e.id)
            .and_then(|k| key_types.get(k))
            .copied()
            .unwrap_or(Ty::any()),
        ExprKind::Binary { op, left, right } => {
            let lt = expr_ty_resolved(left, key_types, dfg, sigs);
            let rt = expr_ty_resolved(right, key_types, dfg, sigs);
            if *op == BinOp::Add && (lt.base == BaseTy::List || rt.base == BaseTy::List) {
                Ty::list()
            } else {
                Ty::int()
            }
        }
        ExprKind::Compare { .. } | ExprKind::BoolAnd { .. } | ExprKind::BoolOr { .. }
        | ExprKind::Not(_) => Ty::bool(),
        ExprKind::Neg(_) => Ty::int(),
        ExprKind::Call { callee, .. } => match callee.as_str() {
            "len" | "sum" | "min" | "max" | "abs" => Ty::int(),
            "range" | "sorted" | "list" => Ty::list(),
            name => sigs.get(name).map(|s| s.ret).unwrap_or(Ty::any()),
        },
        ExprKind::MethodCall { .. } => Ty::none(),
        ExprKind::Index { .. } => Ty::int(),
        ExprKind::Slice { .. } | ExprKind::ListLit(_) | ExprKind::ListComp { .. } => Ty::list(),
        ExprKind::Tuple(_) => Ty::any(),
    }
}

fn is_var(e: &Expr, name: &str) -> bool {
    matches!(&e.kind, ExprKind::Var(n) if n == name)
}

fn mentions_var(e: &Expr, name: &str) -> bool {
    let mut found = false;
    walk_expr(e, &mut |x| {
        if is_var(x, name) {
            found = true;
        }
    });
    found
}

pub fn walk_expr(e: &Expr, f: &mut impl FnMut(&Expr)) {
    f(e);
    match &e.kind {
        ExprKind::Binary { left, right, .. }
        | ExprKind::Compare { left, right, .. }
        | ExprKind::BoolAnd { left, right }
        | ExprKind::BoolOr { left, right } => {
            walk_expr(left, f);
            walk_expr(right, f);
        }
        ExprKind::Not(x) | ExprKind::Neg(x) => walk_expr(x, f),
        ExprKind::Call { args, .. } => {
            for a in args {
                walk_expr(a, f);
            }
        }
        ExprKind::MethodCall { recv, args, .. } => {
            walk_expr(recv, f);
            for a in args {
                walk_expr(a, f);
            }
        }
        ExprKind::Index { base, index } => {
            walk_expr(base, f);
            walk_expr(index, f);
        }
        ExprKind::Slice { base, lo, hi } => {
            walk_expr(base, f);
            if let Some(l) = lo {
                walk_expr(l, f);
            }
            if let Some(h) = hi {
                walk_expr(h, f);
            }
        }
        ExprKind::ListLit(items) | ExprKind::Tuple(items) => {
            for i in items {
                walk_expr(i, f);
            }
        }
        ExprKind::ListComp { elem, iter, cond, .. } => {
            walk_expr(elem, f);
            walk_expr(iter, f);
            if let Some(c) = cond {
                walk_expr(c, f);
            }
        }
        _ => {}
    }
}

pub fn walk_stmts(stmts: &[Stmt], f: &mut impl FnMut(&Expr)) {
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { targets, value } => {
                for t in targets {
                    if let Target::Index { index, .. } = t {
                        walk_expr(index, f);
                    }
                }
                walk_expr(value, f);
            }
            StmtKind::AugAssign { target, value, .. } => {
                if let Target::Index { index, .. } = target {
                    walk_expr(index, f);
                }
                walk_expr(value, f);
            }
            StmtKind::If { cond, then_body, else_body } => {
                walk_expr(cond, f);
                walk_stmts(then_body, f);
                walk_stmts(else_body, f);
            }
            StmtKind::While { cond, body } => {
                walk_expr(cond, f);
                walk_stmts(body, f);
            }
            StmtKind::ForRange { args, body, .. } => {
                for a in args {
                    walk_expr(a, f);
                }
                walk_stmts(body, f);
            }
            StmtKind::ForList { iter, body, .. } => {
                walk_expr(iter, f);
                walk_stmts(body, f);
            }
            StmtKind::Return { value } => {
                if let Some(v) = value {
                    walk_expr(v, f);
                }
            }
            StmtKind::Assert { cond } => walk_expr(cond, f),
            StmtKind::Pass => {}
            StmtKind::ExprStmt { value } => walk_expr(value, f),
        }
    }
}

fn walk_for_iters(stmts: &[Stmt], f: &mut impl FnMut(&Expr)) {
    for s in stmts {
        match &s.kind {
            StmtKind::ForList { iter, body, .. } => {
                f(iter);
                walk_for_iters(body, f);
            }
            StmtKind::If { then_body, else_body, .. } => {
                walk_for_iters(then_body, f);
                walk_for_iters(else_body, f);
            }
            StmtKind::While { body, .. } | StmtKind::ForRange { body, .. } => {
                walk_for_iters(body, f);
            }
            _ => {}
        }
    }
    // Comprehension iterators are list votes too.
    walk_stmts(stmts, &mut |e| {
        if let ExprKind::ListComp { iter, .. } = &e.kind {
            f(iter);
        }
    });
}
