//! Bounded guarded-path enumeration.
//!
//! Loops are unrolled up to a budget; each loop context additionally gets a
//! single residual path that summarizes executions exceeding the budget.
//! An execution trace (from the interpreter) matches exactly one path.

use super::ast::*;
use super::FrontendError;

pub const DEFAULT_PATH_CAP: usize = 256;

/// One branch decision along a path, nested per loop iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathEvent {
    Branch { stmt: StmtId, then_taken: bool },
    Loop { stmt: StmtId, iterations: Vec<Vec<PathEvent>>, residual: bool },
}

/// A guard literal: branch condition plus the polarity the path takes.
#[derive(Debug, Clone)]
pub struct GuardLit {
    pub cond: Expr,
    pub positive: bool,
}

#[derive(Debug, Clone)]
pub struct GuardedPath {
    pub id: usize,
    pub events: Vec<PathEvent>,
    /// Conjunction of the path's branch decisions (if/while conditions).
    pub guard: Vec<GuardLit>,
    /// Statement ids visited, in order.
    pub trace: Vec<StmtId>,
    pub loop_unroll_budget: u32,
    /// Id of the return statement the path exits through, if any.
    pub exit_return: Option<StmtId>,
}

impl GuardedPath {
    /// True when no loop on this path was summarized.
    pub fn is_exact(&self) -> bool {
        fn exact(events: &[PathEvent]) -> bool {
            events.iter().all(|e| match e {
                PathEvent::Branch { .. } => true,
                PathEvent::Loop { iterations, residual, .. } => {
                    !*residual && iterations.iter().all(|it| exact(it))
                }
            })
        }
        exact(&self.events)
    }
}

/// Execution trace recorded by the interpreter; same shape as path events.
pub type ExecTrace = Vec<ExecEvent>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecEvent {
    Branch { stmt: StmtId, then_taken: bool },
    Loop { stmt: StmtId, iterations: Vec<ExecTrace> },
}

pub fn enumerate_paths(
    f: &FunctionDef,
    unroll: u32,
) -> Result<Vec<GuardedPath>, FrontendError> {
    enumerate_paths_capped(f, unroll, DEFAULT_PATH_CAP)
}

pub fn enumerate_paths_capped(
    f: &FunctionDef,
    unroll: u32,
    cap: usize,
) -> Result<Vec<GuardedPath>, FrontendError> {
    let init = PathState {
        events: Vec::new(),
        guard: Vec::new(),
        trace: Vec::new(),
        exit_return: None,
    };
    let states = enum_block(&f.body, vec![(init, false)], unroll, cap)?;
    let mut paths = Vec::new();
    for (i, (st, _returned)) in states.into_iter().enumerate() {
        paths.push(GuardedPath {
            id: i,
            events: st.events,
            guard: st.guard,
            trace: st.trace,
            loop_unroll_budget: unroll,
            exit_return: st.exit_return,
        });
    }
    Ok(paths)
}

#[derive(Debug, Clone)]
struct PathState {
    events: Vec<PathEvent>,
    guard: Vec<GuardLit>,
    trace: Vec<StmtId>,
    exit_return: Option<StmtId>,
}

type Flow = Vec<(PathState, bool)>; // (state, returned)

fn enum_block(
    stmts: &[Stmt],
    mut incoming: Flow,
    unroll: u32,
    cap: usize,
) -> Result<Flow, FrontendError> {
    for stmt in stmts {
        let mut next: Flow = Vec::new();
        for (state, returned) in incoming {
            if returned {
                next.push((state, true));
                continue;
            }
            let mut outs = enum_stmt(stmt, state, unroll, cap)?;
            next.append(&mut outs);
            if next.len() > cap {
                return Err(FrontendError::PathBudgetExceeded { count: next.len(), cap });
            }
        }
        incoming = next;
    }
    Ok(incoming)
}

fn enum_stmt(
    stmt: &Stmt,
    mut state: PathState,
    unroll: u32,
    cap: usize,
) -> Result<Flow, FrontendError> {
    state.trace.push(stmt.id);
    match &stmt.kind {
        StmtKind::If { cond, then_body, else_body } => {
            let mut out = Flow::new();
            let mut then_state = state.clone();
            then_state
                .events
                .push(PathEvent::Branch { stmt: stmt.id, then_taken: true });
            then_state.guard.push(GuardLit { cond: cond.clone(), positive: true });
            out.extend(enum_block(then_body, vec![(then_state, false)], unroll, cap)?);
            let mut else_state = state;
            else_state
                .events
                .push(PathEvent::Branch { stmt: stmt.id, then_taken: false });
            else_state.guard.push(GuardLit { cond: cond.clone(), positive: false });
            out.extend(enum_block(else_body, vec![(else_state, false)], unroll, cap)?);
            Ok(out)
        }
        StmtKind::While { cond, body } => {
            enum_loop(stmt, Some(cond), body, state, unroll, cap)
        }
        StmtKind::ForRange { body, .. } | StmtKind::ForList { body, .. } => {
            enum_loop(stmt, None, body, state, unroll, cap)
        }
        StmtKind::Return { .. } => {
            state.exit_return = Some(stmt.id);
            Ok(vec![(state, true)])
        }
        _ => Ok(vec![(state, false)]),
    }
}

fn enum_loop(
    stmt: &Stmt,
    cond: Option<&Expr>,
    body: &[Stmt],
    state: PathState,
    unroll: u32,
    cap: usize,
) -> Result<Flow, FrontendError> {
    let mut out = Flow::new();

    // k exact iterations for k = 0..=unroll, with body decisions enumerated.
    // Each frontier element carries the iteration event lists so far.
    let mut frontier: Vec<(PathState, Vec<Vec<PathEvent>>)> = vec![(state.clone(), Vec::new())];
    for k in 0..=unroll {
        // Exit after exactly k iterations.
        for (st, iters) in &frontier {
            let mut exit = st.clone();
            exit.events.push(PathEvent::Loop {
                stmt: stmt.id,
                iterations: iters.clone(),
                residual: false,
            });
            if let Some(c) = cond {
                exit.guard.push(GuardLit { cond: c.clone(), positive: false });
            }
            out.push((exit, false));
        }
        if k == unroll {
            break;
        }
        // Run one more iteration on every frontier state.
        let mut next_frontier = Vec::new();
        for (st, iters) in frontier {
            let mut entry = st.clone();
            let base_len = entry.events.len();
            if let Some(c) = cond {
                entry.guard.push(GuardLit { cond: c.clone(), positive: true });
            }
            let body_flows = enum_block(body, vec![(entry, false)], unroll, cap)?;
            for (body_state, returned) in body_flows {
                // Body events since entry form this iteration's event list.
                let mut iter_events = body_state.events.clone();
                let this_iter: Vec<PathEvent> = iter_events.split_off(base_len);
                let mut new_iters = iters.clone();
                new_iters.push(this_iter);
                if returned {
                    // Function exits inside the loop body.
                    let mut done = body_state;
                    done.events.truncate(base_len);
                    done.events.push(PathEvent::Loop {
                        stmt: stmt.id,
                        iterations: new_iters,
                        residual: false,
                    });
                    out.push((done, true));
                } else {
                    let mut cont = body_state;
                    cont.events.truncate(base_len);
                    next_frontier.push((cont, new_iters));
                }
                if out.len() + next_frontier.len() > cap {
                    return Err(FrontendError::PathBudgetExceeded {
                        count: out.len() + next_frontier.len(),
                        cap,
                    });
                }
            }
        }
        frontier = next_frontier;
    }

    // One residual path per loop context: the loop runs more than `unroll`
    // iterations; body decisions inside are not enumerated.
    let mut residual = state;
    residual.events.push(PathEvent::Loop { stmt: stmt.id, iterations: Vec::new(), residual: true });
    if let Some(c) = cond {
        residual.guard.push(GuardLit { cond: c.clone(), positive: true });
    }
    out.push((residual, false));
    Ok(out)
}

/// Find the unique path whose decision structure matches an execution trace.
pub fn match_path<'p>(paths: &'p [GuardedPath], trace: &ExecTrace) -> Option<&'p GuardedPath> {
    let unroll = paths.first().map(|p| p.loop_unroll_budget).unwrap_or(0);
    paths.iter().find(|p| events_match(&p.events, trace, unroll))
}

fn events_match(path: &[PathEvent], exec: &[ExecEvent], unroll: u32) -> bool {
    if path.len() != exec.len() {
        return false;
    }
    path.iter().zip(exec).all(|(p, e)| match (p, e) {
        (
            PathEvent::Branch { stmt: ps, then_taken: pt },
            ExecEvent::Branch { stmt: es, then_taken: et },
        ) => ps == es && pt == et,
        (
            PathEvent::Loop { stmt: ps, iterations: pi, residual },
            ExecEvent::Loop { stmt: es, iterations: ei },
        ) => {
            if ps != es {
                return false;
            }
            if *residual {
                ei.len() > unroll as usize
            } else {
                pi.len() == ei.len()
                    && pi.iter().zip(ei).all(|(pit, eit)| events_match(pit, eit, unroll))
            }
        }
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_module;

    #[test]
    fn single_if_two_paths() {
        let m = parse_module("def f(x):\n    if x > 0:\n        return 1\n    return 0\n", "t")
            .unwrap();
        let paths = enumerate_paths(&m.functions[0], 0).unwrap();
        assert_eq!(paths.len(), 2);
    }

    #[test]
    fn nested_if_three_leaves() {
        let src = "def f(x, y):\n    if x > 0:\n        if y > 0:\n            return 2\n        return 1\n    return 0\n";
        let m = parse_module(src, "t").unwrap();
        let paths = enumerate_paths(&m.functions[0], 0).unwrap();
        // then/then, then/else, else: three reachable leaves.
        assert_eq!(paths.len(), 3);
    }

    #[test]
    fn loop_unroll_counts() {
        let src = "def f(n):\n    t = 0\n    while n > 0:\n        t = t + n\n        n = n - 1\n    return t\n";
        let m = parse_module(src, "t").unwrap();
        let paths = enumerate_paths(&m.functions[0], 2).unwrap();
        // 0,1,2 iterations + residual.
        assert_eq!(paths.len(), 4);
        assert_eq!(paths.iter().filter(|p| !p.is_exact()).count(), 1);
    }

    #[test]
    fn budget_exceeded() {
        // 9 sequential ifs: 512 paths > 256 cap.
        let mut src = String::from("def f(x):\n");
        for _ in 0..9 {
            src.push_str("    if x > 0:\n        x = x + 1\n");
        }
        src.push_str("    return x\n");
        let m = parse_module(&src, "t").unwrap();
        let err = enumerate_paths(&m.functions[0], 0).unwrap_err();
        assert!(matches!(err, crate::frontend::FrontendError::PathBudgetExceeded { .. }));
    }
}
