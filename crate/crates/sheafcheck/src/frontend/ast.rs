//! AST for MiniLang, a small Python-subset language.
//!
//! Every node carries a source line and a unique id so that later stages
//! (site harvesting, dataflow) can address individual operations such as
//! divisions and index expressions.

use std::fmt;

pub type StmtId = u32;
pub type ExprId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub functions: Vec<FunctionDef>,
    pub source_name: String,
}

impl Module {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
    pub id: StmtId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    /// `x = e`, `a[i] = e`, or parallel `x, y = e1, e2`.
    Assign { targets: Vec<Target>, value: Expr },
    /// `x += e` and friends. Kept distinct for round-trip fidelity;
    /// dataflow desugars it to a plain assignment.
    AugAssign { target: Target, op: BinOp, value: Expr },
    If { cond: Expr, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    /// `for v in range(...)`.
    ForRange { var: String, args: Vec<Expr>, body: Vec<Stmt> },
    /// `for v in xs` over a list value.
    ForList { var: String, iter: Expr, body: Vec<Stmt> },
    Return { value: Option<Expr> },
    Assert { cond: Expr },
    Pass,
    ExprStmt { value: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Name(String),
    /// `a[i] = ...` with a plain name base.
    Index { base: String, index: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub line: u32,
    pub id: ExprId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    NoneLit,
    Var(String),
    Binary { op: BinOp, left: Box<Expr>, right: Box<Expr> },
    Compare { op: CmpOp, left: Box<Expr>, right: Box<Expr> },
    BoolAnd { left: Box<Expr>, right: Box<Expr> },
    BoolOr { left: Box<Expr>, right: Box<Expr> },
    Not(Box<Expr>),
    Neg(Box<Expr>),
    /// Call of a user function or builtin (`len`, `sum`, `range`, `min`,
    /// `max`, `abs`, `sorted`, `list`) by name.
    Call { callee: String, args: Vec<Expr> },
    /// `xs.append(e)` / `xs.extend(e)` on a list-valued receiver.
    MethodCall { recv: Box<Expr>, method: String, args: Vec<Expr> },
    Index { base: Box<Expr>, index: Box<Expr> },
    Slice { base: Box<Expr>, lo: Option<Box<Expr>>, hi: Option<Box<Expr>> },
    ListLit(Vec<Expr>),
    /// `[elem for var in iter if cond]`.
    ListComp { elem: Box<Expr>, var: String, iter: Box<Expr>, cond: Option<Box<Expr>> },
    /// Parallel-assignment right-hand side `e1, e2, ...`. Only valid in
    /// that position; the parser rejects tuples elsewhere.
    Tuple(Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    FloorDiv,
    TrueDiv,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::FloorDiv => "//",
            BinOp::TrueDiv => "/",
            BinOp::Mod => "%",
        }
    }

    pub fn is_division(self) -> bool {
        matches!(self, BinOp::FloorDiv | BinOp::TrueDiv | BinOp::Mod)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negated(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The comparison with operands swapped, preserving meaning.
    pub fn flipped(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => CmpOp::Ne,
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
        }
    }
}

pub const BUILTINS: &[&str] = &["len", "sum", "range", "min", "max", "abs", "sorted", "list"];

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Structural equality ignoring line numbers and node ids. Used by the
/// parse/print round-trip check.
pub fn modules_structurally_equal(a: &Module, b: &Module) -> bool {
    a.source_name == b.source_name
        && a.functions.len() == b.functions.len()
        && a.functions
            .iter()
            .zip(&b.functions)
            .all(|(fa, fb)| functions_structurally_equal(fa, fb))
}

pub fn functions_structurally_equal(a: &FunctionDef, b: &FunctionDef) -> bool {
    a.name == b.name && a.params == b.params && bodies_eq(&a.body, &b.body)
}

fn bodies_eq(a: &[Stmt], b: &[Stmt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| stmts_eq(x, y))
}

fn stmts_eq(a: &Stmt, b: &Stmt) -> bool {
    use StmtKind::*;
    match (&a.kind, &b.kind) {
        (Assign { targets: t1, value: v1 }, Assign { targets: t2, value: v2 }) => {
            t1.len() == t2.len()
                && t1.iter().zip(t2).all(|(x, y)| targets_eq(x, y))
                && exprs_eq(v1, v2)
        }
        (
            AugAssign { target: t1, op: o1, value: v1 },
            AugAssign { target: t2, op: o2, value: v2 },
        ) => targets_eq(t1, t2) && o1 == o2 && exprs_eq(v1, v2),
        (
            If { cond: c1, then_body: tb1, else_body: eb1 },
            If { cond: c2, then_body: tb2, else_body: eb2 },
        ) => exprs_eq(c1, c2) && bodies_eq(tb1, tb2) && bodies_eq(eb1, eb2),
        (While { cond: c1, body: b1 }, While { cond: c2, body: b2 }) => {
            exprs_eq(c1, c2) && bodies_eq(b1, b2)
        }
        (
            ForRange { var: v1, args: a1, body: b1 },
            ForRange { var: v2, args: a2, body: b2 },
        ) => {
            v1 == v2
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| exprs_eq(x, y))
                && bodies_eq(b1, b2)
        }
        (
            ForList { var: v1, iter: i1, body: b1 },
            ForList { var: v2, iter: i2, body: b2 },
        ) => v1 == v2 && exprs_eq(i1, i2) && bodies_eq(b1, b2),
        (Return { value: v1 }, Return { value: v2 }) => match (v1, v2) {
            (None, None) => true,
            (Some(x), Some(y)) => exprs_eq(x, y),
            _ => false,
        },
        (Assert { cond: c1 }, Assert { cond: c2 }) => exprs_eq(c1, c2),
        (Pass, Pass) => true,
        (ExprStmt { value: v1 }, ExprStmt { value: v2 }) => exprs_eq(v1, v2),
        _ => false,
    }
}

fn targets_eq(a: &Target, b: &Target) -> bool {
    match (a, b) {
        (Target::Name(x), Target::Name(y)) => x == y,
        (Target::Index { base: b1, index: i1 }, Target::Index { base: b2, index: i2 }) => {
            b1 == b2 && exprs_eq(i1, i2)
        }
        _ => false,
    }
}

fn exprs_eq(a: &Expr, b: &Expr) -> bool {
    use ExprKind::*;
    match (&a.kind, &b.kind) {
        (Int(x), Int(y)) => x == y,
        (Bool(x), Bool(y)) => x == y,
        (NoneLit, NoneLit) => true,
        (Var(x), Var(y)) => x == y,
        (
            Binary { op: o1, left: l1, right: r1 },
            Binary { op: o2, left: l2, right: r2 },
        ) => o1 == o2 && exprs_eq(l1, l2) && exprs_eq(r1, r2),
        (
            Compare { op: o1, left: l1, right: r1 },
            Compare { op: o2, left: l2, right: r2 },
        ) => o1 == o2 && exprs_eq(l1, l2) && exprs_eq(r1, r2),
        (BoolAnd { left: l1, right: r1 }, BoolAnd { left: l2, right: r2 })
        | (BoolOr { left: l1, right: r1 }, BoolOr { left: l2, right: r2 }) => {
            exprs_eq(l1, l2) && exprs_eq(r1, r2)
        }
        (Not(x), Not(y)) | (Neg(x), Neg(y)) => exprs_eq(x, y),
        (Call { callee: c1, args: a1 }, Call { callee: c2, args: a2 }) => {
            c1 == c2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| exprs_eq(x, y))
        }
        (
            MethodCall { recv: r1, method: m1, args: a1 },
            MethodCall { recv: r2, method: m2, args: a2 },
        ) => {
            exprs_eq(r1, r2)
                && m1 == m2
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| exprs_eq(x, y))
        }
        (Index { base: b1, index: i1 }, Index { base: b2, index: i2 }) => {
            exprs_eq(b1, b2) && exprs_eq(i1, i2)
        }
        (Slice { base: b1, lo: l1, hi: h1 }, Slice { base: b2, lo: l2, hi: h2 }) => {
            exprs_eq(b1, b2) && opt_eq(l1, l2) && opt_eq(h1, h2)
        }
        (ListLit(a1), ListLit(a2)) | (Tuple(a1), Tuple(a2)) => {
            a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| exprs_eq(x, y))
        }
        (
            ListComp { elem: e1, var: v1, iter: i1, cond: c1 },
            ListComp { elem: e2, var: v2, iter: i2, cond: c2 },
        ) => exprs_eq(e1, e2) && v1 == v2 && exprs_eq(i1, i2) && opt_eq(c1, c2),
        _ => false,
    }
}

fn opt_eq(a: &Option<Box<Expr>>, b: &Option<Box<Expr>>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => exprs_eq(x, y),
        _ => false,
    }
}
