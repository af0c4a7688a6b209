//! SSA renaming and dataflow over the structured AST.
//!
//! Every assignment (including list mutations, which get a fresh list
//! version) produces a new SSA key `base@version`. Joins insert phi nodes;
//! loop headers get phis for every variable the body reassigns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::*;
use super::FrontendError;

/// An SSA variable: source name plus version.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub base: String,
    pub version: u32,
}

impl Key {
    pub fn new(base: &str, version: u32) -> Self {
        Key { base: base.to_string(), version }
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.version == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}@{}", self.base, self.version)
        }
    }
}

#[derive(Debug, Clone)]
pub struct DefInfo {
    pub key: Key,
    pub line: u32,
    pub kind: DefKind,
}

#[derive(Debug, Clone)]
pub enum DefKind {
    Param { index: usize },
    /// Plain assignment; the defining expression is cloned here (node ids
    /// are preserved, so `var_use` applies to it).
    Expr { stmt: StmtId, expr: Expr },
    AugAssign { prev: Key, op: BinOp, value: Expr },
    Phi { sources: Vec<Key> },
    RangeIter { args: Vec<Expr> },
    ListIter { iter: Expr },
    /// Comprehension-local element variable.
    CompIter { iter: Expr },
    ListStore { prev: Key, index: Expr, value: Expr },
    ListAppend { prev: Key, arg: Expr },
    ListExtend { prev: Key, arg: Expr },
}

#[derive(Debug, Clone)]
pub struct PhiNode {
    pub result: Key,
    pub sources: Vec<Key>,
    /// Join point: the If/While/For statement that induced the phi.
    pub stmt: StmtId,
    pub loop_phi: bool,
}

#[derive(Debug, Clone)]
pub struct DataflowGraph {
    pub func: String,
    pub ssa_defs: BTreeMap<Key, DefInfo>,
    pub def_use: BTreeMap<Key, Vec<ExprId>>,
    /// All SSA definitions reaching each statement (closed under
    /// control-flow predecessors).
    pub reaching: BTreeMap<StmtId, BTreeSet<Key>>,
    pub phi_nodes: Vec<PhiNode>,
    /// Resolution of every `Var` occurrence to its SSA key.
    pub var_use: BTreeMap<ExprId, Key>,
    /// Visible bindings (base name -> key) at statement entry.
    pub env_at_stmt: BTreeMap<StmtId, BTreeMap<String, Key>>,
    /// Visible bindings after the whole body (for fall-off-end analysis).
    pub env_at_exit: BTreeMap<String, Key>,
    pub key_order: Vec<Key>,
    /// Integer literals appearing in the function (drives the atom universe).
    pub constants: BTreeSet<i64>,
}

impl DataflowGraph {
    pub fn def_of(&self, key: &Key) -> Option<&DefInfo> {
        self.ssa_defs.get(key)
    }
}

pub fn build_dataflow(m: &Module) -> Result<BTreeMap<String, DataflowGraph>, FrontendError> {
    let mut out = BTreeMap::new();
    for f in &m.functions {
        out.insert(f.name.clone(), build_function_dataflow(f)?);
    }
    Ok(out)
}

pub fn build_function_dataflow(f: &FunctionDef) -> Result<DataflowGraph, FrontendError> {
    let mut b = Builder {
        g: DataflowGraph {
            func: f.name.clone(),
            ssa_defs: BTreeMap::new(),
            def_use: BTreeMap::new(),
            reaching: BTreeMap::new(),
            phi_nodes: Vec::new(),
            var_use: BTreeMap::new(),
            env_at_stmt: BTreeMap::new(),
            env_at_exit: BTreeMap::new(),
            key_order: Vec::new(),
            constants: BTreeSet::new(),
        },
        versions: BTreeMap::new(),
        comp_locals: Vec::new(),
    };
    let mut env: Env = BTreeMap::new();
    for (i, p) in f.params.iter().enumerate() {
        let key = b.fresh(p);
        b.define(key.clone(), f.line, DefKind::Param { index: i });
        env.insert(p.clone(), key);
    }
    let mut reach: BTreeSet<Key> = env.values().cloned().collect();
    b.block(&f.body, &mut env, &mut reach)?;
    b.g.env_at_exit = env;
    Ok(b.g)
}

type Env = BTreeMap<String, Key>;

struct Builder {
    g: DataflowGraph,
    versions: BTreeMap<String, u32>,
    /// Stack of comprehension-local bindings, innermost last.
    comp_locals: Vec<(String, Key)>,
}

impl Builder {
    fn fresh(&mut self, base: &str) -> Key {
        let v = self.versions.entry(base.to_string()).or_insert(0);
        let key = Key::new(base, *v);
        *v += 1;
        key
    }

    fn define(&mut self, key: Key, line: u32, kind: DefKind) {
        self.g.key_order.push(key.clone());
        self.g.ssa_defs.insert(key.clone(), DefInfo { key, line, kind });
    }

    fn block(
        &mut self,
        stmts: &[Stmt],
        env: &mut Env,
        reach: &mut BTreeSet<Key>,
    ) -> Result<(), FrontendError> {
        for stmt in stmts {
            self.g.env_at_stmt.insert(stmt.id, env.clone());
            self.g.reaching.insert(stmt.id, reach.clone());
            self.stmt(stmt, env, reach)?;
        }
        Ok(())
    }

    fn stmt(
        &mut self,
        stmt: &Stmt,
        env: &mut Env,
        reach: &mut BTreeSet<Key>,
    ) -> Result<(), FrontendError> {
        match &stmt.kind {
            StmtKind::Assign { targets, value } => {
                self.expr(value, env)?;
                match (&value.kind, targets.len()) {
                    (ExprKind::Tuple(items), n) if n > 1 => {
                        // Parallel assignment: all RHS resolved above against
                        // the pre-assignment env; targets bound afterwards.
                        for (t, item) in targets.iter().zip(items) {
                            self.bind_target(t, item, stmt, env, reach)?;
                        }
                    }
                    _ => {
                        self.bind_target(&targets[0], value, stmt, env, reach)?;
                    }
                }
            }
            StmtKind::AugAssign { target, op, value } => {
                self.expr(value, env)?;
                match target {
                    Target::Name(name) => {
                        let prev = self.lookup(name, stmt.line, env)?;
                        self.note_key_use(&prev, value.id);
                        let key = self.fresh(name);
                        self.define(
                            key.clone(),
                            stmt.line,
                            DefKind::AugAssign { prev, op: *op, value: value.clone() },
                        );
                        env.insert(name.clone(), key.clone());
                        reach.insert(key);
                    }
                    Target::Index { base, index } => {
                        self.expr(index, env)?;
                        let prev = self.lookup(base, stmt.line, env)?;
                        let key = self.fresh(base);
                        self.define(
                            key.clone(),
                            stmt.line,
                            DefKind::ListStore {
                                prev,
                                index: index.clone(),
                                value: value.clone(),
                            },
                        );
                        env.insert(base.clone(), key.clone());
                        reach.insert(key);
                    }
                }
            }
            StmtKind::If { cond, then_body, else_body } => {
                self.expr(cond, env)?;
                let mut env_then = env.clone();
                let mut reach_then = reach.clone();
                self.block(then_body, &mut env_then, &mut reach_then)?;
                let mut env_else = env.clone();
                let mut reach_else = reach.clone();
                self.block(else_body, &mut env_else, &mut reach_else)?;
                let then_ret = always_returns(then_body);
                let else_ret = always_returns(else_body);
                *reach = reach_then.union(&reach_else).cloned().collect();
                *env = match (then_ret, else_ret) {
                    (true, true) => env_then, // unreachable after; arbitrary
                    (true, false) => env_else,
                    (false, true) => env_then,
                    (false, false) => {
                        self.join_envs(&env_then, &env_else, stmt, reach)
                    }
                };
            }
            StmtKind::While { cond, body } => {
                self.loop_stmt(stmt, Some(cond), None, body, env, reach)?;
            }
            StmtKind::ForRange { var, args, body } => {
                for a in args {
                    self.expr(a, env)?;
                }
                let iter_def = DefKind::RangeIter { args: args.clone() };
                self.loop_stmt(stmt, None, Some((var, iter_def)), body, env, reach)?;
            }
            StmtKind::ForList { var, iter, body } => {
                self.expr(iter, env)?;
                let iter_def = DefKind::ListIter { iter: iter.clone() };
                self.loop_stmt(stmt, None, Some((var, iter_def)), body, env, reach)?;
            }
            StmtKind::Return { value } => {
                if let Some(v) = value {
                    self.expr(v, env)?;
                }
            }
            StmtKind::Assert { cond } => {
                self.expr(cond, env)?;
            }
            StmtKind::Pass => {}
            StmtKind::ExprStmt { value } => {
                self.expr(value, env)?;
                // A method call on a list variable mutates it: new version.
                if let ExprKind::MethodCall { recv, method, args } = &value.kind {
                    if let ExprKind::Var(base) = &recv.kind {
                        let prev = self.lookup(base, stmt.line, env)?;
                        let key = self.fresh(base);
                        let arg = args.first().cloned().unwrap_or_else(|| Expr {
                            kind: ExprKind::ListLit(Vec::new()),
                            line: stmt.line,
                            id: u32::MAX,
                        });
                        let kind = if method == "append" {
                            DefKind::ListAppend { prev, arg }
                        } else {
                            DefKind::ListExtend { prev, arg }
                        };
                        self.define(key.clone(), stmt.line, kind);
                        env.insert(base.clone(), key.clone());
                        reach.insert(key);
                    }
                }
            }
        }
        Ok(())
    }

    fn bind_target(
        &mut self,
        target: &Target,
        value: &Expr,
        stmt: &Stmt,
        env: &mut Env,
        reach: &mut BTreeSet<Key>,
    ) -> Result<(), FrontendError> {
        match target {
            Target::Name(name) => {
                let key = self.fresh(name);
                self.define(
                    key.clone(),
                    stmt.line,
                    DefKind::Expr { stmt: stmt.id, expr: value.clone() },
                );
                env.insert(name.clone(), key.clone());
                reach.insert(key);
            }
            Target::Index { base, index } => {
                self.expr(index, env)?;
                let prev = self.lookup(base, stmt.line, env)?;
                let key = self.fresh(base);
                self.define(
                    key.clone(),
                    stmt.line,
                    DefKind::ListStore { prev, index: index.clone(), value: value.clone() },
                );
                env.insert(base.clone(), key.clone());
                reach.insert(key);
            }
        }
        Ok(())
    }

    fn loop_stmt(
        &mut self,
        stmt: &Stmt,
        while_cond: Option<&Expr>,
        iter_var: Option<(&str, DefKind)>,
        body: &[Stmt],
        env: &mut Env,
        reach: &mut BTreeSet<Key>,
    ) -> Result<(), FrontendError> {
        // Loop-carried variables get header phis before the body is renamed.
        let assigned = assigned_names(body);
        let mut phi_keys: Vec<(String, Key, Key)> = Vec::new(); // (base, before, phi)
        for name in &assigned {
            if let Some(before) = env.get(name).cloned() {
                let phi = self.fresh(name);
                self.define(phi.clone(), stmt.line, DefKind::Phi { sources: Vec::new() });
                env.insert(name.clone(), phi.clone());
                reach.insert(phi.clone());
                phi_keys.push((name.clone(), before, phi));
            }
        }
        if let Some((var, def)) = iter_var {
            let key = self.fresh(var);
            self.define(key.clone(), stmt.line, def);
            env.insert(var.to_string(), key.clone());
            reach.insert(key);
        }
        if let Some(cond) = while_cond {
            self.expr(cond, env)?;
        }
        let mut body_env = env.clone();
        self.block(body, &mut body_env, reach)?;
        // Close the phis with the value flowing around the back edge.
        for (name, before, phi) in phi_keys {
            let back = body_env.get(&name).cloned().unwrap_or_else(|| before.clone());
            let sources = vec![before, back];
            if let Some(info) = self.g.ssa_defs.get_mut(&phi) {
                info.kind = DefKind::Phi { sources: sources.clone() };
            }
            self.g.phi_nodes.push(PhiNode { result: phi, sources, stmt: stmt.id, loop_phi: true });
        }
        Ok(())
    }

    fn join_envs(
        &mut self,
        a: &Env,
        b: &Env,
        stmt: &Stmt,
        reach: &mut BTreeSet<Key>,
    ) -> Env {
        let mut out = Env::new();
        for (name, ka) in a {
            match b.get(name) {
                Some(kb) if kb == ka => {
                    out.insert(name.clone(), ka.clone());
                }
                Some(kb) => {
                    let phi = self.fresh(name);
                    let sources = vec![ka.clone(), kb.clone()];
                    self.define(phi.clone(), stmt.line, DefKind::Phi { sources: sources.clone() });
                    self.g.phi_nodes.push(PhiNode {
                        result: phi.clone(),
                        sources,
                        stmt: stmt.id,
                        loop_phi: false,
                    });
                    reach.insert(phi.clone());
                    out.insert(name.clone(), phi);
                }
                // Defined on one side only: drop; later use is a
                // UseBeforeDef, which matches the conservative contract.
                None => {}
            }
        }
        out
    }

    fn lookup(&mut self, name: &str, line: u32, env: &Env) -> Result<Key, FrontendError> {
        for (local, key) in self.comp_locals.iter().rev() {
            if local == name {
                return Ok(key.clone());
            }
        }
        env.get(name).cloned().ok_or_else(|| FrontendError::UseBeforeDef {
            variable: name.to_string(),
            line,
        })
    }

    fn note_key_use(&mut self, key: &Key, expr: ExprId) {
        self.g.def_use.entry(key.clone()).or_default().push(expr);
    }

    fn expr(&mut self, e: &Expr, env: &Env) -> Result<(), FrontendError> {
        match &e.kind {
            ExprKind::Int(n) => {
                self.g.constants.insert(*n);
            }
            ExprKind::Bool(_) | ExprKind::NoneLit => {}
            ExprKind::Var(name) => {
                let key = self.lookup(name, e.line, env)?;
                self.g.var_use.insert(e.id, key.clone());
                self.note_key_use(&key, e.id);
            }
            ExprKind::Binary { left, right, .. }
            | ExprKind::Compare { left, right, .. }
            | ExprKind::BoolAnd { left, right }
            | ExprKind::BoolOr { left, right } => {
                self.expr(left, env)?;
                self.expr(right, env)?;
            }
            ExprKind::Not(x) | ExprKind::Neg(x) => self.expr(x, env)?,
            ExprKind::Call { args, .. } => {
                for a in args {
                    self.expr(a, env)?;
                }
            }
            ExprKind::MethodCall { recv, args, .. } => {
                self.expr(recv, env)?;
                for a in args {
                    self.expr(a, env)?;
                }
            }
            ExprKind::Index { base, index } => {
                self.expr(base, env)?;
                self.expr(index, env)?;
            }
            ExprKind::Slice { base, lo, hi } => {
                self.expr(base, env)?;
                if let Some(l) = lo {
                    self.expr(l, env)?;
                }
                if let Some(h) = hi {
                    self.expr(h, env)?;
                }
            }
            ExprKind::ListLit(items) | ExprKind::Tuple(items) => {
                for i in items {
                    self.expr(i, env)?;
                }
            }
            ExprKind::ListComp { elem, var, iter, cond } => {
                self.expr(iter, env)?;
                let key = self.fresh(var);
                self.define(
                    key.clone(),
                    e.line,
                    DefKind::CompIter { iter: (**iter).clone() },
                );
                self.comp_locals.push((var.clone(), key));
                self.expr(elem, env)?;
                if let Some(c) = cond {
                    self.expr(c, env)?;
                }
                self.comp_locals.pop();
            }
        }
        Ok(())
    }
}

/// Source names assigned anywhere in a statement list (including nested).
pub fn assigned_names(stmts: &[Stmt]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_assigned(stmts, &mut out);
    out
}

fn collect_assigned(stmts: &[Stmt], out: &mut BTreeSet<String>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { targets, .. } => {
                for t in targets {
                    match t {
                        Target::Name(n) => {
                            out.insert(n.clone());
                        }
                        Target::Index { base, .. } => {
                            out.insert(base.clone());
                        }
                    }
                }
            }
            StmtKind::AugAssign { target, .. } => match target {
                Target::Name(n) => {
                    out.insert(n.clone());
                }
                Target::Index { base, .. } => {
                    out.insert(base.clone());
                }
            },
            StmtKind::If { then_body, else_body, .. } => {
                collect_assigned(then_body, out);
                collect_assigned(else_body, out);
            }
            StmtKind::While { body, .. } => collect_assigned(body, out),
            StmtKind::ForRange { var, body, .. } | StmtKind::ForList { var, body, .. } => {
                out.insert(var.clone());
                collect_assigned(body, out);
            }
            StmtKind::ExprStmt { value } => {
                if let ExprKind::MethodCall { recv, .. } = &value.kind {
                    if let ExprKind::Var(base) = &recv.kind {
                        out.insert(base.clone());
                    }
                }
            }
            _ => {}
        }
    }
}

/// Whether every control path through the block ends in a return.
pub fn always_returns(stmts: &[Stmt]) -> bool {
    for s in stmts {
        match &s.kind {
            StmtKind::Return { .. } => return true,
            StmtKind::If { then_body, else_body, .. } => {
                if !else_body.is_empty()
                    && always_returns(then_body)
                    && always_returns(else_body)
                {
                    return true;
                }
            }
            _ => {}
        }
    }
    false
}
