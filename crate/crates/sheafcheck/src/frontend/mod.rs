//! MiniLang frontend: parsing, SSA dataflow, type inference, and guarded
//! path enumeration.

pub mod ast;
pub mod dataflow;
pub mod lexer;
pub mod parser;
pub mod paths;
pub mod printer;
pub mod sig;

pub use ast::{
    modules_structurally_equal, BinOp, CmpOp, Expr, ExprId, ExprKind, FunctionDef, Module,
    Stmt, StmtId, StmtKind, Target,
};
pub use dataflow::{build_dataflow, build_function_dataflow, DataflowGraph, DefKind, Key};
pub use parser::parse_module as parse_module_named;
pub use paths::{enumerate_paths, enumerate_paths_capped, ExecEvent, ExecTrace, GuardedPath};
pub use printer::print_module;
pub use sig::{infer_types, BaseTy, ModuleTypes, Signature, Ty};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("unsupported construct '{construct}' at line {line}")]
    Unsupported { construct: String, line: u32 },
    #[error("use of '{variable}' before definition at line {line}")]
    UseBeforeDef { variable: String, line: u32 },
    #[error("path budget exceeded: {count} paths (cap {cap})")]
    PathBudgetExceeded { count: usize, cap: usize },
}

/// Parse MiniLang source text into a module.
pub fn parse_module(source: &str, source_name: &str) -> Result<Module, FrontendError> {
    parser::parse_module(source, source_name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ast::*;

    const OVERVIEW: &str = "\
def normalize(values):
    total = sum(values)
    return [v / total for v in values]

def process(data):
    filtered = [x for x in data if x >= 0]
    return normalize(filtered)
";

    #[test]
    fn parses_overview_program() {
        let m = parse_module(OVERVIEW, "overview.mpy").unwrap();
        assert_eq!(m.functions.len(), 2);
        assert_eq!(m.functions[0].name, "normalize");
        assert_eq!(m.functions[1].params, vec!["data".to_string()]);
        // The division node sits on line 3, inside the comprehension.
        let mut div_line = None;
        sig::walk_stmts(&m.functions[0].body, &mut |e| {
            if let ExprKind::Binary { op: BinOp::TrueDiv, .. } = e.kind {
                div_line = Some(e.line);
            }
        });
        assert_eq!(div_line, Some(3));
    }

    #[test]
    fn empty_source_is_empty_module() {
        let m = parse_module("", "empty.mpy").unwrap();
        assert_eq!(m.functions.len(), 0);
    }

    #[test]
    fn class_definition_rejected() {
        let err = parse_module("class Foo:\n    pass\n", "t").unwrap_err();
        match err {
            FrontendError::Unsupported { construct, .. } => assert_eq!(construct, "class"),
            other => panic!("expected UnsupportedConstruct, got {other:?}"),
        }
    }

    #[test]
    fn import_rejected() {
        assert!(matches!(
            parse_module("import os\n", "t").unwrap_err(),
            FrontendError::Unsupported { .. }
        ));
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_module("def f()\n    pass\n", "t").unwrap_err();
        assert!(matches!(err, FrontendError::Syntax { line: 1, .. }));
    }

    #[test]
    fn parallel_assignment_and_semicolons() {
        let src = "def f(n):\n    a, b = 0, 1\n    a, b = b, a + b; n += 1\n    return b\n";
        let m = parse_module(src, "t").unwrap();
        let body = &m.functions[0].body;
        assert_eq!(body.len(), 4);
        assert!(matches!(&body[0].kind, StmtKind::Assign { targets, .. } if targets.len() == 2));
    }

    #[test]
    fn round_trip_is_structurally_identical() {
        let sources = [
            OVERVIEW,
            "def f(xs, target):\n    lo, hi = 0, len(xs) - 1\n    while lo <= hi:\n        mid = (lo + hi) // 2\n        if xs[mid] == target:\n            return mid\n        elif xs[mid] < target:\n            lo = mid + 1\n        else:\n            hi = mid - 1\n    return -1\n",
            "def g(arr):\n    a = list(arr)\n    n = len(a)\n    for i in range(n):\n        for j in range(n - i - 2):\n            if a[j] > a[j + 1]:\n                a[j], a[j + 1] = a[j + 1], a[j]\n    return a\n",
            "def h(arr):\n    if len(arr) <= 1:\n        return list(arr)\n    mid = len(arr) // 2\n    left = h(arr[:mid])\n    right = h(arr[mid:])\n    merged, i, j = [], 0, 0\n    while i < len(left) and j < len(right):\n        if left[i] <= right[j]:\n            merged.append(left[i]); i += 1\n        else:\n            merged.append(right[j]); j += 1\n    merged.extend(left[i:])\n    merged.extend(right[j:])\n    return merged\n",
            "def k(x):\n    assert x >= 0\n    return not (x == 1 or x == 2) and x % 2 == 0\n",
        ];
        for src in sources {
            let m1 = parse_module(src, "t").unwrap();
            let printed = print_module(&m1);
            let m2 = parse_module(&printed, "t")
                .unwrap_or_else(|e| panic!("reparse failed: {e}\n--- printed ---\n{printed}"));
            assert!(
                modules_structurally_equal(&m1, &m2),
                "round trip changed structure:\n--- original ---\n{src}\n--- printed ---\n{printed}"
            );
        }
    }

    #[test]
    fn ssa_single_assignment_and_phis() {
        let src = "def f(c):\n    if c > 0:\n        x = 1\n    else:\n        x = 2\n    return x\n";
        let m = parse_module(src, "t").unwrap();
        let dfg = build_function_dataflow(&m.functions[0]).unwrap();
        // Exactly one phi for x at the join.
        assert_eq!(dfg.phi_nodes.len(), 1);
        assert_eq!(dfg.phi_nodes[0].result.base, "x");
        // Single-assignment: every key defined once (BTreeMap enforces it,
        // so check the order list has no duplicates).
        let mut seen = std::collections::BTreeSet::new();
        for k in &dfg.key_order {
            assert!(seen.insert(k.clone()), "duplicate SSA def {k}");
        }
    }

    #[test]
    fn straight_line_has_no_phis() {
        let src = "def f(x):\n    y = x + 1\n    return y\n";
        let m = parse_module(src, "t").unwrap();
        let dfg = build_function_dataflow(&m.functions[0]).unwrap();
        assert!(dfg.phi_nodes.is_empty());
    }

    #[test]
    fn overview_dataflow_defs() {
        let m = parse_module(OVERVIEW, "overview.mpy").unwrap();
        let dfg = build_function_dataflow(&m.functions[0]).unwrap();
        assert!(dfg.ssa_defs.contains_key(&Key::new("values", 0)));
        assert!(dfg.ssa_defs.contains_key(&Key::new("total", 0)));
        match &dfg.ssa_defs[&Key::new("total", 0)].kind {
            DefKind::Expr { expr, .. } => {
                assert!(matches!(&expr.kind, ExprKind::Call { callee, .. } if callee == "sum"));
            }
            other => panic!("unexpected def kind {other:?}"),
        }
    }

    #[test]
    fn use_before_def_detected() {
        let src = "def f(x):\n    y = z + 1\n    return y\n";
        let m = parse_module(src, "t").unwrap();
        let err = build_function_dataflow(&m.functions[0]).unwrap_err();
        assert!(matches!(err, FrontendError::UseBeforeDef { ref variable, .. } if variable == "z"));
    }

    #[test]
    fn reaching_sets_closed_under_predecessors() {
        let src = "def f(c, n):\n    x = 0\n    if c > 0:\n        x = x + 1\n    else:\n        x = x + 2\n    t = x\n    while n > 0:\n        t = t + 1\n        n = n - 1\n    return t\n";
        let m = parse_module(src, "t").unwrap();
        let dfg = build_function_dataflow(&m.functions[0]).unwrap();
        // Reaching sets only grow along the statement order within a block,
        // and every use's key is in the reaching set of its statement.
        for (stmt, env) in &dfg.env_at_stmt {
            let reach = &dfg.reaching[stmt];
            for key in env.values() {
                assert!(reach.contains(key), "visible {key} missing from reaching at {stmt}");
            }
        }
    }

    #[test]
    fn type_inference_on_overview() {
        let m = parse_module(OVERVIEW, "overview.mpy").unwrap();
        let dfgs = build_dataflow(&m).unwrap();
        let types = infer_types(&m, &dfgs);
        assert_eq!(types.signatures["normalize"].params[0].base, BaseTy::List);
        assert_eq!(types.signatures["process"].params[0].base, BaseTy::List);
        assert_eq!(
            types.key_ty("normalize", &Key::new("total", 0)).base,
            BaseTy::Int
        );
    }

    #[test]
    fn may_none_return_propagates() {
        let src = "def find(xs, t):\n    for i in range(len(xs)):\n        if xs[i] == t:\n            return i\n    return None\n\ndef use(xs):\n    r = find(xs, 3)\n    return r + 1\n";
        let m = parse_module(src, "t").unwrap();
        let dfgs = build_dataflow(&m).unwrap();
        let types = infer_types(&m, &dfgs);
        assert!(types.signatures["find"].ret.may_none);
        assert!(types.key_ty("use", &Key::new("r", 0)).may_none);
    }
}
