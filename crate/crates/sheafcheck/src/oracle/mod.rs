//! Concrete MiniLang interpreter: the ground-truth executor behind witness
//! validation, equivalence sampling, and spec sampling.
//!
//! Big-step, deterministic, with exact rational true division (no floats)
//! and a global step budget. Partial operations fault with a precise site.

pub mod gen;
pub mod minfix;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::frontend::ast::*;
use crate::frontend::paths::{ExecEvent, ExecTrace};

pub const DEFAULT_STEP_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    NoneV,
    List(Vec<Value>),
    Rational(BigRational),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    pub fn list_of(ns: &[i64]) -> Value {
        Value::List(ns.iter().map(|n| Value::int(*n)).collect())
    }

    fn truthy(&self) -> Result<bool, TypeConfusion> {
        Ok(match self {
            Value::Int(n) => !n.is_zero(),
            Value::Bool(b) => *b,
            Value::NoneV => false,
            Value::List(xs) => !xs.is_empty(),
            Value::Rational(r) => !r.is_zero(),
        })
    }

    fn as_rational(&self) -> Option<BigRational> {
        match self {
            Value::Int(n) => Some(BigRational::from_integer(n.clone())),
            Value::Bool(b) => Some(BigRational::from_integer(BigInt::from(i32::from(*b)))),
            Value::Rational(r) => Some(r.clone()),
            _ => None,
        }
    }

    /// Numeric equality across int/bool/rational; deep equality for lists.
    pub fn value_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::List(a), Value::List(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.value_eq(y))
            }
            (Value::NoneV, Value::NoneV) => true,
            (Value::NoneV, _) | (_, Value::NoneV) => false,
            (Value::List(_), _) | (_, Value::List(_)) => false,
            (a, b) => match (a.as_rational(), b.as_rational()) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{}", if *b { "True" } else { "False" }),
            Value::NoneV => write!(f, "None"),
            Value::List(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", parts.join(", "))
            }
            Value::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaultClass {
    DivZero,
    IndexOob,
    NoneDeref,
    AssertFail,
    StepBudget,
}

impl FaultClass {
    pub fn name(self) -> &'static str {
        match self {
            FaultClass::DivZero => "DIV_ZERO",
            FaultClass::IndexOob => "INDEX_OOB",
            FaultClass::NoneDeref => "NONE_DEREF",
            FaultClass::AssertFail => "ASSERT_FAIL",
            FaultClass::StepBudget => "STEP_BUDGET",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeFault {
    pub class: FaultClass,
    pub function: String,
    pub line: u32,
    /// The expression or statement that faulted, when known.
    pub expr: Option<ExprId>,
    pub inputs: Vec<Value>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("arity mismatch calling '{name}': expected {expected}, got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("type confusion at line {line}: {message}")]
    TypeConfusion { line: u32, message: String },
}

#[derive(Debug, Clone)]
struct TypeConfusion {
    line: u32,
    message: String,
}

impl TypeConfusion {
    fn new(line: u32, message: impl Into<String>) -> TypeConfusion {
        TypeConfusion { line, message: message.into() }
    }
}

/// A visit to a partial operation, recorded whether or not it faulted.
/// `violated` marks viability violations that do not fault (negative
/// range/slice bounds).
#[derive(Debug, Clone)]
pub struct SiteVisit {
    pub function: String,
    pub line: u32,
    pub expr: Option<ExprId>,
    pub class_name: &'static str,
    pub violated: bool,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub result: Result<Value, RuntimeFault>,
    pub steps: u64,
    /// Branch/loop decisions of the top-level function only.
    pub trace: ExecTrace,
    pub visits: Vec<SiteVisit>,
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&Value> {
        self.result.as_ref().ok()
    }

    pub fn is_budget_exhausted(&self) -> bool {
        matches!(&self.result, Err(f) if f.class == FaultClass::StepBudget)
    }
}

pub fn eval_function(
    m: &Module,
    fname: &str,
    args: &[Value],
    step_budget: u64,
) -> Result<EvalOutcome, OracleError> {
    let f = m
        .function(fname)
        .ok_or_else(|| OracleError::UnknownFunction(fname.to_string()))?;
    if f.params.len() != args.len() {
        return Err(OracleError::ArityMismatch {
            name: fname.to_string(),
            expected: f.params.len(),
            got: args.len(),
        });
    }
    let mut interp = Interp {
        module: m,
        steps: 0,
        budget: step_budget,
        visits: Vec::new(),
        top_inputs: args.to_vec(),
    };
    let mut trace = ExecTrace::new();
    let out = interp.call(f, args.to_vec(), Some(&mut trace));
    let result = match out {
        Ok(Flow::Value(v)) => Ok(v),
        Ok(Flow::Return(v)) => Ok(v),
        Err(Stop::Fault(fault)) => Err(fault),
        Err(Stop::Confused(tc)) => {
            return Err(OracleError::TypeConfusion { line: tc.line, message: tc.message })
        }
    };
    Ok(EvalOutcome { result, steps: interp.steps, trace, visits: interp.visits })
}

enum Flow {
    Value(Value),
    Return(Value),
}

enum Stop {
    Fault(RuntimeFault),
    Confused(TypeConfusion),
}

impl From<TypeConfusion> for Stop {
    fn from(tc: TypeConfusion) -> Stop {
        Stop::Confused(tc)
    }
}

type Env = BTreeMap<String, Value>;

struct Interp<'m> {
    module: &'m Module,
    steps: u64,
    budget: u64,
    visits: Vec<SiteVisit>,
    top_inputs: Vec<Value>,
}

impl<'m> Interp<'m> {
    fn tick(&mut self, function: &str, line: u32) -> Result<(), Stop> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(Stop::Fault(RuntimeFault {
                class: FaultClass::StepBudget,
                function: function.to_string(),
                line,
                expr: None,
                inputs: self.top_inputs.clone(),
            }))
        } else {
            Ok(())
        }
    }

    fn fault(&self, class: FaultClass, function: &str, line: u32, expr: Option<ExprId>) -> Stop {
        Stop::Fault(RuntimeFault {
            class,
            function: function.to_string(),
            line,
            expr,
            inputs: self.top_inputs.clone(),
        })
    }

    fn call(
        &mut self,
        f: &FunctionDef,
        args: Vec<Value>,
        trace: Option<&mut ExecTrace>,
    ) -> Result<Flow, Stop> {
        let mut env: Env = f.params.iter().cloned().zip(args).collect();
        let mut trace = trace;
        let flow = self.block(f, &f.body, &mut env, &mut trace)?;
        match flow {
            Some(v) => Ok(Flow::Return(v)),
            None => Ok(Flow::Return(Value::NoneV)), // fall off the end
        }
    }

    fn block(
        &mut self,
        f: &FunctionDef,
        stmts: &[Stmt],
        env: &mut Env,
        trace: &mut Option<&mut ExecTrace>,
    ) -> Result<Option<Value>, Stop> {
        for stmt in stmts {
            if let Some(v) = self.stmt(f, stmt, env, trace)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    fn stmt(
        &mut self,
        f: &FunctionDef,
        stmt: &Stmt,
        env: &mut Env,
        trace: &mut Option<&mut ExecTrace>,
    ) -> Result<Option<Value>, Stop> {
        self.tick(&f.name, stmt.line)?;
        match &stmt.kind {
            StmtKind::Assign { targets, value } => {
                match (&value.kind, targets.len()) {
                    (ExprKind::Tuple(items), n) if n > 1 => {
                        let vals: Vec<Value> = items
                            .iter()
                            .map(|e| self.expr(f, e, env))
                            .collect::<Result<_, _>>()?;
                        for (t, v) in targets.iter().zip(vals) {
                            self.assign(f, t, v, env)?;
                        }
                    }
                    _ => {
                        let v = self.expr(f, value, env)?;
                        self.assign(f, &targets[0], v, env)?;
                    }
                }
                Ok(None)
            }
            StmtKind::AugAssign { target, op, value } => {
                let rhs = self.expr(f, value, env)?;
                let cur = match target {
                    Target::Name(n) => env.get(n).cloned().ok_or_else(|| {
                        Stop::Confused(TypeConfusion::new(stmt.line, format!("unbound {n}")))
                    })?,
                    Target::Index { base, index } => {
                        let idx = self.expr(f, index, env)?;
                        let lst = env.get(base).cloned().ok_or_else(|| {
                            Stop::Confused(TypeConfusion::new(stmt.line, format!("unbound {base}")))
                        })?;
                        self.index_value(f, &lst, &idx, stmt.line, None)?
                    }
                };
                let v = self.binop(f, *op, cur, rhs, stmt.line, None)?;
                self.assign(f, target, v, env)?;
                Ok(None)
            }
            StmtKind::If { cond, then_body, else_body } => {
                let c = self.expr(f, cond, env)?;
                let taken = c.truthy().map_err(Stop::Confused)?;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(ExecEvent::Branch { stmt: stmt.id, then_taken: taken });
                }
                if taken {
                    self.block(f, then_body, env, trace)
                } else {
                    self.block(f, else_body, env, trace)
                }
            }
            StmtKind::While { cond, body } => {
                let mut iterations: Vec<ExecTrace> = Vec::new();
                loop {
                    self.tick(&f.name, stmt.line)?;
                    let c = self.expr(f, cond, env)?;
                    if !c.truthy().map_err(Stop::Confused)? {
                        break;
                    }
                    let mut inner: Option<ExecTrace> =
                        trace.as_ref().map(|_| ExecTrace::new());
                    let mut inner_ref = inner.as_mut();
                    let flow = self.block(f, body, env, &mut inner_ref)?;
                    if let Some(it) = inner.take() {
                        iterations.push(it);
                    }
                    if let Some(v) = flow {
                        if let Some(t) = trace.as_deref_mut() {
                            t.push(ExecEvent::Loop { stmt: stmt.id, iterations });
                        }
                        return Ok(Some(v));
                    }
                }
                if let Some(t) = trace.as_deref_mut() {
                    t.push(ExecEvent::Loop { stmt: stmt.id, iterations });
                }
                Ok(None)
            }
            StmtKind::ForRange { var, args, body } => {
                let bounds: Vec<Value> = args
                    .iter()
                    .map(|a| self.expr(f, a, env))
                    .collect::<Result<_, _>>()?;
                let ints: Vec<BigInt> = bounds
                    .iter()
                    .map(|v| self.expect_int(v, stmt.line))
                    .collect::<Result<_, _>>()?;
                // Negative range bounds are an analysis class, not a runtime
                // fault; record the visit.
                for (a, n) in args.iter().zip(&ints) {
                    self.visits.push(SiteVisit {
                        function: f.name.clone(),
                        line: a.line,
                        expr: Some(a.id),
                        class_name: "NEG_RANGE",
                        violated: n.is_negative(),
                    });
                }
                let (start, stop, step) = match ints.len() {
                    1 => (BigInt::from(0), ints[0].clone(), BigInt::from(1)),
                    2 => (ints[0].clone(), ints[1].clone(), BigInt::from(1)),
                    3 => (ints[0].clone(), ints[1].clone(), ints[2].clone()),
                    _ => unreachable!("parser caps range arity"),
                };
                if step.is_zero() {
                    return Err(Stop::Confused(TypeConfusion::new(
                        stmt.line,
                        "range() step must be nonzero",
                    )));
                }
                let mut iterations: Vec<ExecTrace> = Vec::new();
                let mut i = start;
                loop {
                    let more = if step.is_negative() { i > stop } else { i < stop };
                    if !more {
                        break;
                    }
                    self.tick(&f.name, stmt.line)?;
                    env.insert(var.clone(), Value::Int(i.clone()));
                    let mut inner: Option<ExecTrace> =
                        trace.as_ref().map(|_| ExecTrace::new());
                    let mut inner_ref = inner.as_mut();
                    let flow = self.block(f, body, env, &mut inner_ref)?;
                    if let Some(it) = inner.take() {
                        iterations.push(it);
                    }
                    if let Some(v) = flow {
                        if let Some(t) = trace.as_deref_mut() {
                            t.push(ExecEvent::Loop { stmt: stmt.id, iterations });
                        }
                        return Ok(Some(v));
                    }
                    i += &step;
                }
                if let Some(t) = trace.as_deref_mut() {
                    t.push(ExecEvent::Loop { stmt: stmt.id, iterations });
                }
                Ok(None)
            }
            StmtKind::ForList { var, iter, body } => {
                let seq = self.expr(f, iter, env)?;
                let items = match seq {
                    Value::List(xs) => xs,
                    Value::NoneV => {
                        return Err(self.fault(
                            FaultClass::NoneDeref,
                            &f.name,
                            iter.line,
                            Some(iter.id),
                        ))
                    }
                    other => {
                        return Err(Stop::Confused(TypeConfusion::new(
                            iter.line,
                            format!("cannot iterate {other}"),
                        )))
                    }
                };
                let mut iterations: Vec<ExecTrace> = Vec::new();
                for item in items {
                    self.tick(&f.name, stmt.line)?;
                    env.insert(var.clone(), item);
                    let mut inner: Option<ExecTrace> =
                        trace.as_ref().map(|_| ExecTrace::new());
                    let mut inner_ref = inner.as_mut();
                    let flow = self.block(f, body, env, &mut inner_ref)?;
                    if let Some(it) = inner.take() {
                        iterations.push(it);
                    }
                    if let Some(v) = flow {
                        if let Some(t) = trace.as_deref_mut() {
                            t.push(ExecEvent::Loop { stmt: stmt.id, iterations });
                        }
                        return Ok(Some(v));
                    }
                }
                if let Some(t) = trace.as_deref_mut() {
                    t.push(ExecEvent::Loop { stmt: stmt.id, iterations });
                }
                Ok(None)
            }
            StmtKind::Return { value } => {
                let v = match value {
                    Some(e) => self.expr(f, e, env)?,
                    None => Value::NoneV,
                };
                Ok(Some(v))
            }
            StmtKind::Assert { cond } => {
                let c = self.expr(f, cond, env)?;
                let ok = c.truthy().map_err(Stop::Confused)?;
                self.visits.push(SiteVisit {
                    function: f.name.clone(),
                    line: stmt.line,
                    expr: None,
                    class_name: "ASSERT_FAIL",
                    violated: !ok,
                });
                if ok {
                    Ok(None)
                } else {
                    Err(self.fault(FaultClass::AssertFail, &f.name, stmt.line, None))
                }
            }
            StmtKind::Pass => Ok(None),
            StmtKind::ExprStmt { value } => {
                let v = self.expr(f, value, env)?;
                // Method calls mutate the receiver variable in place.
                if let ExprKind::MethodCall { recv, .. } = &value.kind {
                    if let ExprKind::Var(name) = &recv.kind {
                        env.insert(name.clone(), v);
                    }
                }
                Ok(None)
            }
        }
    }

    fn assign(&mut self, f: &FunctionDef, target: &Target, v: Value, env: &mut Env) -> Result<(), Stop> {
        match target {
            Target::Name(n) => {
                env.insert(n.clone(), v);
                Ok(())
            }
            Target::Index { base, index } => {
                let idx_v = self.expr(f, index, env)?;
                let idx = self.expect_int(&idx_v, index.line)?;
                let cur = env.get_mut(base).ok_or_else(|| {
                    Stop::Confused(TypeConfusion::new(index.line, format!("unbound {base}")))
                })?;
                match cur {
                    Value::List(xs) => {
                        let i = idx.to_i64().unwrap_or(-1);
                        self.visits.push(SiteVisit {
                            function: f.name.clone(),
                            line: index.line,
                            expr: Some(index.id),
                            class_name: "INDEX_OOB",
                            violated: i < 0 || i as usize >= xs.len(),
                        });
                        if i < 0 || i as usize >= xs.len() {
                            return Err(self.fault(
                                FaultClass::IndexOob,
                                &f.name,
                                index.line,
                                Some(index.id),
                            ));
                        }
                        xs[i as usize] = v;
                        Ok(())
                    }
                    Value::NoneV => Err(self.fault(
                        FaultClass::NoneDeref,
                        &f.name,
                        index.line,
                        Some(index.id),
                    )),
                    other => Err(Stop::Confused(TypeConfusion::new(
                        index.line,
                        format!("cannot index-assign into {other}"),
                    ))),
                }
            }
        }
    }

    fn expr(&mut self, f: &FunctionDef, e: &Expr, env: &mut Env) -> Result<Value, Stop> {
        self.tick(&f.name, e.line)?;
        match &e.kind {
            ExprKind::Int(n) => Ok(Value::int(*n)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::NoneLit => Ok(Value::NoneV),
            ExprKind::Var(n) => env.get(n).cloned().ok_or_else(|| {
                Stop::Confused(TypeConfusion::new(e.line, format!("unbound variable {n}")))
            }),
            ExprKind::Binary { op, left, right } => {
                let l = self.expr(f, left, env)?;
                let r = self.expr(f, right, env)?;
                self.binop(f, *op, l, r, e.line, Some(e.id))
            }
            ExprKind::Compare { op, left, right } => {
                let l = self.expr(f, left, env)?;
                let r = self.expr(f, right, env)?;
                self.compare(f, *op, &l, &r, e.line, Some(e.id))
            }
            ExprKind::BoolAnd { left, right } => {
                let l = self.expr(f, left, env)?;
                if !l.truthy().map_err(Stop::Confused)? {
                    return Ok(l);
                }
                self.expr(f, right, env)
            }
            ExprKind::BoolOr { left, right } => {
                let l = self.expr(f, left, env)?;
                if l.truthy().map_err(Stop::Confused)? {
                    return Ok(l);
                }
                self.expr(f, right, env)
            }
            ExprKind::Not(x) => {
                let v = self.expr(f, x, env)?;
                Ok(Value::Bool(!v.truthy().map_err(Stop::Confused)?))
            }
            ExprKind::Neg(x) => {
                let v = self.expr(f, x, env)?;
                match v {
                    Value::Int(n) => Ok(Value::Int(-n)),
                    Value::Bool(b) => Ok(Value::Int(BigInt::from(-i32::from(b)))),
                    Value::Rational(r) => Ok(Value::Rational(-r)),
                    Value::NoneV => {
                        Err(self.fault(FaultClass::NoneDeref, &f.name, e.line, Some(e.id)))
                    }
                    other => Err(Stop::Confused(TypeConfusion::new(
                        e.line,
                        format!("cannot negate {other}"),
                    ))),
                }
            }
            ExprKind::Call { callee, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.expr(f, a, env)?);
                }
                if is_builtin(callee) {
                    self.builtin(f, callee, args, vals, e)
                } else {
                    let target = self
                        .module
                        .function(callee)
                        .ok_or_else(|| {
                            Stop::Confused(TypeConfusion::new(
                                e.line,
                                format!("unknown function {callee}"),
                            ))
                        })?;
                    if target.params.len() != vals.len() {
                        return Err(Stop::Confused(TypeConfusion::new(
                            e.line,
                            format!(
                                "arity mismatch calling {callee}: expected {}, got {}",
                                target.params.len(),
                                vals.len()
                            ),
                        )));
                    }
                    match self.call(target, vals, None)? {
                        Flow::Return(v) | Flow::Value(v) => Ok(v),
                    }
                }
            }
            ExprKind::MethodCall { recv, method, args } => {
                let base = self.expr(f, recv, env)?;
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.expr(f, a, env)?);
                }
                match base {
                    Value::List(mut xs) => {
                        match method.as_str() {
                            "append" => {
                                xs.push(vals.into_iter().next().unwrap_or(Value::NoneV));
                            }
                            "extend" => match vals.into_iter().next() {
                                Some(Value::List(ys)) => xs.extend(ys),
                                Some(Value::NoneV) => {
                                    return Err(self.fault(
                                        FaultClass::NoneDeref,
                                        &f.name,
                                        e.line,
                                        Some(e.id),
                                    ))
                                }
                                _ => {
                                    return Err(Stop::Confused(TypeConfusion::new(
                                        e.line,
                                        "extend() requires a list".to_string(),
                                    )))
                                }
                            },
                            _ => unreachable!("parser restricts methods"),
                        }
                        Ok(Value::List(xs))
                    }
                    Value::NoneV => {
                        Err(self.fault(FaultClass::NoneDeref, &f.name, e.line, Some(e.id)))
                    }
                    other => Err(Stop::Confused(TypeConfusion::new(
                        e.line,
                        format!("method call on {other}"),
                    ))),
                }
            }
            ExprKind::Index { base, index } => {
                let b = self.expr(f, base, env)?;
                let i = self.expr(f, index, env)?;
                self.index_value(f, &b, &i, e.line, Some(e.id))
            }
            ExprKind::Slice { base, lo, hi } => {
                let b = self.expr(f, base, env)?;
                let xs = match b {
                    Value::List(xs) => xs,
                    Value::NoneV => {
                        return Err(self.fault(
                            FaultClass::NoneDeref,
                            &f.name,
                            e.line,
                            Some(e.id),
                        ))
                    }
                    other => {
                        return Err(Stop::Confused(TypeConfusion::new(
                            e.line,
                            format!("cannot slice {other}"),
                        )))
                    }
                };
                let len = xs.len() as i64;
                let mut bound = |opt: &Option<Box<Expr>>, default: i64| -> Result<i64, Stop> {
                    match opt {
                        None => Ok(default),
                        Some(expr) => {
                            let v = self.expr(f, expr, env)?;
                            let n = self.expect_int(&v, e.line)?;
                            let n = n.to_i64().unwrap_or(i64::MAX);
                            self.visits.push(SiteVisit {
                                function: f.name.clone(),
                                line: expr.line,
                                expr: Some(expr.id),
                                class_name: "NEG_RANGE",
                                violated: n < 0,
                            });
                            Ok(n.clamp(0, len))
                        }
                    }
                };
                let start = bound(lo, 0)?;
                let stop = bound(hi, len)?;
                let slice = if start < stop {
                    xs[start as usize..stop as usize].to_vec()
                } else {
                    Vec::new()
                };
                Ok(Value::List(slice))
            }
            ExprKind::ListLit(items) => {
                let mut vals = Vec::with_capacity(items.len());
                for item in items {
                    vals.push(self.expr(f, item, env)?);
                }
                Ok(Value::List(vals))
            }
            ExprKind::ListComp { elem, var, iter, cond } => {
                let seq = self.expr(f, iter, env)?;
                let items = match seq {
                    Value::List(xs) => xs,
                    Value::NoneV => {
                        return Err(self.fault(
                            FaultClass::NoneDeref,
                            &f.name,
                            iter.line,
                            Some(iter.id),
                        ))
                    }
                    other => {
                        return Err(Stop::Confused(TypeConfusion::new(
                            iter.line,
                            format!("cannot iterate {other}"),
                        )))
                    }
                };
                let shadow = env.get(var).cloned();
                let mut out = Vec::new();
                for item in items {
                    self.tick(&f.name, e.line)?;
                    env.insert(var.clone(), item);
                    let keep = match cond {
                        Some(c) => {
                            let cv = self.expr(f, c, env)?;
                            cv.truthy().map_err(Stop::Confused)?
                        }
                        None => true,
                    };
                    if keep {
                        out.push(self.expr(f, elem, env)?);
                    }
                }
                match shadow {
                    Some(v) => {
                        env.insert(var.clone(), v);
                    }
                    None => {
                        env.remove(var);
                    }
                }
                Ok(Value::List(out))
            }
            ExprKind::Tuple(_) => Err(Stop::Confused(TypeConfusion::new(
                e.line,
                "tuple outside assignment".to_string(),
            ))),
        }
    }

    fn index_value(
        &mut self,
        f: &FunctionDef,
        base: &Value,
        index: &Value,
        line: u32,
        expr: Option<ExprId>,
    ) -> Result<Value, Stop> {
        match base {
            Value::List(xs) => {
                let idx = self.expect_int(index, line)?;
                let i = idx.to_i64().unwrap_or(-1);
                let oob = i < 0 || i as usize >= xs.len();
                self.visits.push(SiteVisit {
                    function: f.name.clone(),
                    line,
                    expr,
                    class_name: "INDEX_OOB",
                    violated: oob,
                });
                if oob {
                    Err(self.fault(FaultClass::IndexOob, &f.name, line, expr))
                } else {
                    Ok(xs[i as usize].clone())
                }
            }
            Value::NoneV => Err(self.fault(FaultClass::NoneDeref, &f.name, line, expr)),
            other => Err(Stop::Confused(TypeConfusion::new(
                line,
                format!("cannot index {other}"),
            ))),
        }
    }

    fn binop(
        &mut self,
        f: &FunctionDef,
        op: BinOp,
        l: Value,
        r: Value,
        line: u32,
        expr: Option<ExprId>,
    ) -> Result<Value, Stop> {
        // List concatenation.
        if op == BinOp::Add {
            if let (Value::List(a), Value::List(b)) = (&l, &r) {
                let mut out = a.clone();
                out.extend(b.clone());
                return Ok(Value::List(out));
            }
        }
        if matches!(l, Value::NoneV) || matches!(r, Value::NoneV) {
            return Err(self.fault(FaultClass::NoneDeref, &f.name, line, expr));
        }
        let (Some(a), Some(b)) = (l.as_rational(), r.as_rational()) else {
            return Err(Stop::Confused(TypeConfusion::new(
                line,
                format!("arithmetic on {l} and {r}"),
            )));
        };
        if op.is_division() {
            let zero = b.is_zero();
            self.visits.push(SiteVisit {
                function: f.name.clone(),
                line,
                expr,
                class_name: "DIV_ZERO",
                violated: zero,
            });
            if zero {
                return Err(self.fault(FaultClass::DivZero, &f.name, line, expr));
            }
        }
        let out = match op {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::TrueDiv => a / b,
            BinOp::FloorDiv => (a / b).floor(),
            BinOp::Mod => {
                let q = (a.clone() / b.clone()).floor();
                a - q * b
            }
        };
        if out.is_integer() && op != BinOp::TrueDiv {
            Ok(Value::Int(out.to_integer()))
        } else if out.is_integer() && matches!((&l, &r), (Value::Int(_), Value::Int(_))) {
            // Exact division of ints stays rational per the language
            // definition, but an integral rational is displayed as an int
            // and compares equal to one; normalize to Int for determinism.
            Ok(Value::Int(out.to_integer()))
        } else if out.is_integer() {
            Ok(Value::Int(out.to_integer()))
        } else {
            Ok(Value::Rational(out))
        }
    }

    fn compare(
        &mut self,
        f: &FunctionDef,
        op: CmpOp,
        l: &Value,
        r: &Value,
        line: u32,
        expr: Option<ExprId>,
    ) -> Result<Value, Stop> {
        match op {
            CmpOp::Eq => return Ok(Value::Bool(l.value_eq(r))),
            CmpOp::Ne => return Ok(Value::Bool(!l.value_eq(r))),
            _ => {}
        }
        // Ordering: numeric, or lexicographic on int lists.
        let ord = match (l, r) {
            (Value::List(a), Value::List(b)) => {
                let mut ord = std::cmp::Ordering::Equal;
                for (x, y) in a.iter().zip(b.iter()) {
                    match (x.as_rational(), y.as_rational()) {
                        (Some(p), Some(q)) => {
                            if p != q {
                                ord = p.cmp(&q);
                                break;
                            }
                        }
                        _ => {
                            return Err(self.fault(
                                FaultClass::NoneDeref,
                                &f.name,
                                line,
                                expr,
                            ))
                        }
                    }
                }
                if ord == std::cmp::Ordering::Equal {
                    ord = a.len().cmp(&b.len());
                }
                ord
            }
            _ => {
                if matches!(l, Value::NoneV) || matches!(r, Value::NoneV) {
                    return Err(self.fault(FaultClass::NoneDeref, &f.name, line, expr));
                }
                match (l.as_rational(), r.as_rational()) {
                    (Some(a), Some(b)) => a.cmp(&b),
                    _ => {
                        return Err(Stop::Confused(TypeConfusion::new(
                            line,
                            format!("cannot order {l} and {r}"),
                        )))
                    }
                }
            }
        };
        let b = match op {
            CmpOp::Lt => ord == std::cmp::Ordering::Less,
            CmpOp::Le => ord != std::cmp::Ordering::Greater,
            CmpOp::Gt => ord == std::cmp::Ordering::Greater,
            CmpOp::Ge => ord != std::cmp::Ordering::Less,
            CmpOp::Eq | CmpOp::Ne => unreachable!(),
        };
        Ok(Value::Bool(b))
    }

    fn builtin(
        &mut self,
        f: &FunctionDef,
        name: &str,
        arg_exprs: &[Expr],
        vals: Vec<Value>,
        e: &Expr,
    ) -> Result<Value, Stop> {
        let require_list = |v: &Value, this: &Self| -> Result<Vec<Value>, Stop> {
            match v {
                Value::List(xs) => Ok(xs.clone()),
                Value::NoneV => {
                    Err(this.fault(FaultClass::NoneDeref, &f.name, e.line, Some(e.id)))
                }
                other => Err(Stop::Confused(TypeConfusion::new(
                    e.line,
                    format!("{name}() requires a list, got {other}"),
                ))),
            }
        };
        match name {
            "len" => {
                let xs = require_list(&vals[0], self)?;
                Ok(Value::Int(BigInt::from(xs.len())))
            }
            "sum" => {
                let xs = require_list(&vals[0], self)?;
                let mut acc = BigRational::from_integer(BigInt::from(0));
                for x in &xs {
                    match x.as_rational() {
                        Some(r) => acc += r,
                        None => {
                            return Err(self.fault(
                                FaultClass::NoneDeref,
                                &f.name,
                                e.line,
                                Some(e.id),
                            ))
                        }
                    }
                }
                if acc.is_integer() {
                    Ok(Value::Int(acc.to_integer()))
                } else {
                    Ok(Value::Rational(acc))
                }
            }
            "abs" => match &vals[0] {
                Value::Int(n) => Ok(Value::Int(n.abs())),
                Value::Bool(b) => Ok(Value::int(i64::from(*b))),
                Value::Rational(r) => Ok(Value::Rational(r.abs())),
                Value::NoneV => {
                    Err(self.fault(FaultClass::NoneDeref, &f.name, e.line, Some(e.id)))
                }
                other => Err(Stop::Confused(TypeConfusion::new(
                    e.line,
                    format!("abs() on {other}"),
                ))),
            },
            "min" | "max" => {
                let pool: Vec<Value> = if vals.len() == 1 {
                    require_list(&vals[0], self)?
                } else {
                    vals
                };
                // An empty aggregate is an out-of-bounds access on the
                // empty collection.
                self.visits.push(SiteVisit {
                    function: f.name.clone(),
                    line: e.line,
                    expr: Some(e.id),
                    class_name: "INDEX_OOB",
                    violated: pool.is_empty(),
                });
                if pool.is_empty() {
                    return Err(self.fault(FaultClass::IndexOob, &f.name, e.line, Some(e.id)));
                }
                let mut best: Option<BigRational> = None;
                let mut best_v: Option<Value> = None;
                for v in pool {
                    let Some(r) = v.as_rational() else {
                        return Err(self.fault(
                            FaultClass::NoneDeref,
                            &f.name,
                            e.line,
                            Some(e.id),
                        ));
                    };
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            if name == "min" {
                                r < *b
                            } else {
                                r > *b
                            }
                        }
                    };
                    if better {
                        best = Some(r);
                        best_v = Some(v);
                    }
                }
                Ok(best_v.unwrap())
            }
            "sorted" => {
                let xs = require_list(&vals[0], self)?;
                let mut keyed: Vec<(BigRational, Value)> = Vec::with_capacity(xs.len());
                for x in xs {
                    match x.as_rational() {
                        Some(r) => keyed.push((r, x)),
                        None => {
                            return Err(self.fault(
                                FaultClass::NoneDeref,
                                &f.name,
                                e.line,
                                Some(e.id),
                            ))
                        }
                    }
                }
                keyed.sort_by(|a, b| a.0.cmp(&b.0));
                Ok(Value::List(keyed.into_iter().map(|(_, v)| v).collect()))
            }
            "list" => {
                let xs = require_list(&vals[0], self)?;
                Ok(Value::List(xs))
            }
            "range" => {
                // range() as a value: materialize the list.
                let ints: Vec<BigInt> = vals
                    .iter()
                    .map(|v| self.expect_int(v, e.line))
                    .collect::<Result<_, _>>()?;
                for (a, n) in arg_exprs.iter().zip(&ints) {
                    self.visits.push(SiteVisit {
                        function: f.name.clone(),
                        line: a.line,
                        expr: Some(a.id),
                        class_name: "NEG_RANGE",
                        violated: n.is_negative(),
                    });
                }
                let (start, stop) = match ints.len() {
                    1 => (BigInt::from(0), ints[0].clone()),
                    2 => (ints[0].clone(), ints[1].clone()),
                    _ => {
                        return Err(Stop::Confused(TypeConfusion::new(
                            e.line,
                            "range() as a value supports 1 or 2 arguments",
                        )))
                    }
                };
                let mut out = Vec::new();
                let mut i = start;
                while i < stop {
                    self.tick(&f.name, e.line)?;
                    out.push(Value::Int(i.clone()));
                    i += 1;
                }
                Ok(Value::List(out))
            }
            _ => unreachable!("is_builtin() gate"),
        }
    }

    fn expect_int(&self, v: &Value, line: u32) -> Result<BigInt, Stop> {
        match v {
            Value::Int(n) => Ok(n.clone()),
            Value::Bool(b) => Ok(BigInt::from(i32::from(*b))),
            Value::Rational(r) if r.is_integer() => Ok(r.to_integer()),
            other => Err(Stop::Confused(TypeConfusion::new(
                line,
                format!("expected an int, got {other}"),
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_module;

    const OVERVIEW: &str = "\
def normalize(values):
    total = sum(values)
    return [v / total for v in values]

def process(data):
    filtered = [x for x in data if x >= 0]
    return normalize(filtered)
";

    #[test]
    fn normalize_empty_list_divides_by_zero() {
        let m = parse_module(OVERVIEW, "t").unwrap();
        let out = eval_function(&m, "normalize", &[Value::List(vec![])], 10_000).unwrap();
        match out.result {
            Err(fault) => {
                assert_eq!(fault.class, FaultClass::DivZero);
                assert_eq!(fault.line, 3);
            }
            Ok(v) => panic!("expected DIV_ZERO, got {v}"),
        }
    }

    #[test]
    fn trivial_return() {
        let m = parse_module("def f():\n    return 0\n", "t").unwrap();
        let out = eval_function(&m, "f", &[], 1000).unwrap();
        assert_eq!(out.result.unwrap(), Value::int(0));
    }

    #[test]
    fn fib_pair_diverges_at_five() {
        let src = "\
def fib_a(n):
    if n <= 1:
        return n
    a, b = 0, 1
    for i in range(2, n + 1):
        a, b = b, a + b
    return b

def fib_b(n):
    if n <= 1:
        return n
    a, b = 0, 1
    for i in range(2, n):
        a, b = b, a + b
    return b
";
        let m = parse_module(src, "t").unwrap();
        let a = eval_function(&m, "fib_a", &[Value::int(5)], 10_000).unwrap();
        let b = eval_function(&m, "fib_b", &[Value::int(5)], 10_000).unwrap();
        assert_eq!(a.result.unwrap(), Value::int(5));
        assert_eq!(b.result.unwrap(), Value::int(3));
    }

    #[test]
    fn true_division_is_exact_rational() {
        let m = parse_module("def f(a, b):\n    return a / b\n", "t").unwrap();
        let out = eval_function(&m, "f", &[Value::int(1), Value::int(3)], 1000).unwrap();
        match out.result.unwrap() {
            Value::Rational(r) => {
                assert_eq!(r, BigRational::new(BigInt::from(1), BigInt::from(3)));
            }
            other => panic!("expected rational, got {other}"),
        }
        // 6 / 2 normalizes to the integer 3 and compares equal to it.
        let out = eval_function(&m, "f", &[Value::int(6), Value::int(2)], 1000).unwrap();
        assert!(out.result.unwrap().value_eq(&Value::int(3)));
    }

    #[test]
    fn floor_division_and_mod() {
        let m = parse_module("def f(a, b):\n    return a // b\n", "t").unwrap();
        let out = eval_function(&m, "f", &[Value::int(-7), Value::int(2)], 1000).unwrap();
        assert_eq!(out.result.unwrap(), Value::int(-4));
        let m = parse_module("def f(a, b):\n    return a % b\n", "t").unwrap();
        let out = eval_function(&m, "f", &[Value::int(-7), Value::int(2)], 1000).unwrap();
        assert_eq!(out.result.unwrap(), Value::int(1));
    }

    #[test]
    fn index_out_of_bounds_faults() {
        let m = parse_module("def f(xs):\n    return xs[3]\n", "t").unwrap();
        let out = eval_function(&m, "f", &[Value::list_of(&[1, 2])], 1000).unwrap();
        assert_eq!(out.result.unwrap_err().class, FaultClass::IndexOob);
    }

    #[test]
    fn negative_range_bound_is_empty_not_fault() {
        let m = parse_module(
            "def f(n):\n    t = 0\n    for i in range(n):\n        t += 1\n    return t\n",
            "t",
        )
        .unwrap();
        let out = eval_function(&m, "f", &[Value::int(-1)], 1000).unwrap();
        assert_eq!(out.result.unwrap(), Value::int(0));
        assert!(out
            .visits
            .iter()
            .any(|v| v.class_name == "NEG_RANGE" && v.violated));
    }

    #[test]
    fn none_arithmetic_faults() {
        let src = "def g():\n    return None\n\ndef f():\n    r = g()\n    return r + 1\n";
        let m = parse_module(src, "t").unwrap();
        let out = eval_function(&m, "f", &[], 1000).unwrap();
        assert_eq!(out.result.unwrap_err().class, FaultClass::NoneDeref);
    }

    #[test]
    fn assert_failure_faults() {
        let m = parse_module("def f(x):\n    assert x >= 0\n    return x\n", "t").unwrap();
        let out = eval_function(&m, "f", &[Value::int(-2)], 1000).unwrap();
        assert_eq!(out.result.unwrap_err().class, FaultClass::AssertFail);
    }

    #[test]
    fn step_budget_exhaustion_is_reported() {
        let m =
            parse_module("def f():\n    x = 0\n    while True:\n        x += 1\n    return x\n", "t")
                .unwrap();
        let out = eval_function(&m, "f", &[], 500).unwrap();
        assert!(out.is_budget_exhausted());
    }

    #[test]
    fn determinism() {
        let m = parse_module(OVERVIEW, "t").unwrap();
        let a = eval_function(&m, "process", &[Value::list_of(&[3, -1, 2])], 10_000).unwrap();
        let b = eval_function(&m, "process", &[Value::list_of(&[3, -1, 2])], 10_000).unwrap();
        assert_eq!(a.result, b.result);
        assert_eq!(a.steps, b.steps);
    }

    #[test]
    fn unknown_function_and_arity() {
        let m = parse_module("def f(x):\n    return x\n", "t").unwrap();
        assert!(matches!(
            eval_function(&m, "nope", &[], 100),
            Err(OracleError::UnknownFunction(_))
        ));
        assert!(matches!(
            eval_function(&m, "f", &[], 100),
            Err(OracleError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn slices_clamp_like_python() {
        let m = parse_module("def f(xs, i):\n    return xs[i:]\n", "t").unwrap();
        let out =
            eval_function(&m, "f", &[Value::list_of(&[1, 2, 3]), Value::int(5)], 1000).unwrap();
        assert_eq!(out.result.unwrap(), Value::List(vec![]));
    }

    #[test]
    fn trace_records_branches_and_loops() {
        let src = "def f(n):\n    if n > 0:\n        t = 1\n    else:\n        t = 2\n    while n > 0:\n        n -= 1\n    return t\n";
        let m = parse_module(src, "t").unwrap();
        let out = eval_function(&m, "f", &[Value::int(2)], 1000).unwrap();
        assert_eq!(out.trace.len(), 2);
        assert!(matches!(out.trace[0], ExecEvent::Branch { then_taken: true, .. }));
        match &out.trace[1] {
            ExecEvent::Loop { iterations, .. } => assert_eq!(iterations.len(), 2),
            other => panic!("expected loop event, got {other:?}"),
        }
    }
}
