//! Recursive-descent parser for MiniLang.

use super::ast::*;
use super::lexer::{tokenize, Kw, Op, Tok, Token};
use super::FrontendError;

pub fn parse_module(source: &str, source_name: &str) -> Result<Module, FrontendError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0, next_stmt_id: 0, next_expr_id: 0 };
    parser.module(source_name)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_stmt_id: StmtId,
    next_expr_id: ExprId,
}

impl Parser {
    fn module(&mut self, source_name: &str) -> Result<Module, FrontendError> {
        let mut functions: Vec<FunctionDef> = Vec::new();
        loop {
            self.skip_newlines();
            if self.at_eof() {
                break;
            }
            let f = self.function_def()?;
            if functions.iter().any(|g| g.name == f.name) {
                return Err(FrontendError::Syntax {
                    line: f.line,
                    col: 1,
                    message: format!("duplicate function name '{}'", f.name),
                });
            }
            functions.push(f);
        }
        Ok(Module { functions, source_name: to_owned_name(source_name) })
    }

    fn function_def(&mut self) -> Result<FunctionDef, FrontendError> {
        let line = self.peek_line();
        self.expect_kw(Kw::Def, "expected 'def' at top level")?;
        let name = self.expect_ident()?;
        self.expect_op(Op::LParen)?;
        let mut params = Vec::new();
        if !self.check_op(Op::RParen) {
            loop {
                let p = self.expect_ident()?;
                if params.contains(&p) {
                    return Err(FrontendError::Syntax {
                        line,
                        col: 1,
                        message: format!("duplicate parameter '{p}' in function '{name}'"),
                    });
                }
                params.push(p);
                if self.check_op(Op::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect_op(Op::RParen)?;
        self.expect_op(Op::Colon)?;
        let body = self.block()?;
        Ok(FunctionDef { name, params, body, line })
    }

    /// NEWLINE INDENT stmt+ DEDENT
    fn block(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        self.expect_newline()?;
        self.skip_newlines();
        if !self.check(&Tok::Indent) {
            let line = self.peek_line();
            return Err(FrontendError::Syntax {
                line,
                col: 1,
                message: "expected an indented block".into(),
            });
        }
        self.advance();
        let mut stmts = Vec::new();
        loop {
            self.skip_newlines();
            if self.check(&Tok::Dedent) {
                self.advance();
                break;
            }
            if self.at_eof() {
                break;
            }
            let mut line_stmts = self.simple_or_compound_line()?;
            stmts.append(&mut line_stmts);
        }
        if stmts.is_empty() {
            let line = self.peek_line();
            return Err(FrontendError::Syntax { line, col: 1, message: "empty block".into() });
        }
        Ok(stmts)
    }

    /// One logical line: a compound statement, or `;`-separated simple
    /// statements.
    fn simple_or_compound_line(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        if self.check_kw(Kw::If) || self.check_kw(Kw::While) || self.check_kw(Kw::For) {
            return Ok(vec![self.compound_stmt()?]);
        }
        if self.check_kw(Kw::Def) {
            let line = self.peek_line();
            return Err(FrontendError::Unsupported { construct: "nested def".into(), line });
        }
        let mut stmts = vec![self.simple_stmt()?];
        while self.check_op(Op::Semicolon) {
            self.advance();
            if self.check(&Tok::Newline) {
                break;
            }
            stmts.push(self.simple_stmt()?);
        }
        self.expect_newline()?;
        Ok(stmts)
    }

    fn compound_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let line = self.peek_line();
        if self.check_kw(Kw::If) {
            self.advance();
            return self.if_tail(line);
        }
        if self.check_kw(Kw::While) {
            self.advance();
            let cond = self.expr()?;
            self.expect_op(Op::Colon)?;
            let body = self.block()?;
            return Ok(self.mk_stmt(StmtKind::While { cond, body }, line));
        }
        // for
        self.expect_kw(Kw::For, "expected 'for'")?;
        let var = self.expect_ident()?;
        self.expect_kw(Kw::In, "expected 'in' in for statement")?;
        // `for v in range(...)` is special-cased; anything else iterates a list.
        if let Tok::Ident(name) = self.peek_tok().clone() {
            if name == "range" && matches!(self.peek2(), Some(Tok::Op(Op::LParen))) {
                self.advance();
                self.advance();
                let mut args = vec![self.expr()?];
                while self.check_op(Op::Comma) {
                    self.advance();
                    args.push(self.expr()?);
                }
                self.expect_op(Op::RParen)?;
                if args.len() > 3 {
                    return Err(FrontendError::Syntax {
                        line,
                        col: 1,
                        message: "range() takes at most 3 arguments".into(),
                    });
                }
                self.expect_op(Op::Colon)?;
                let body = self.block()?;
                return Ok(self.mk_stmt(StmtKind::ForRange { var, args, body }, line));
            }
        }
        let iter = self.expr()?;
        self.expect_op(Op::Colon)?;
        let body = self.block()?;
        Ok(self.mk_stmt(StmtKind::ForList { var, iter, body }, line))
    }

    fn if_tail(&mut self, line: u32) -> Result<Stmt, FrontendError> {
        let cond = self.expr()?;
        self.expect_op(Op::Colon)?;
        let then_body = self.block()?;
        self.skip_newlines();
        let else_body = if self.check_kw(Kw::Elif) {
            let elif_line = self.peek_line();
            self.advance();
            vec![self.if_tail(elif_line)?]
        } else if self.check_kw(Kw::Else) {
            self.advance();
            self.expect_op(Op::Colon)?;
            self.block()?
        } else {
            Vec::new()
        };
        Ok(self.mk_stmt(StmtKind::If { cond, then_body, else_body }, line))
    }

    fn simple_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let line = self.peek_line();
        if self.check_kw(Kw::Return) {
            self.advance();
            let value = if self.check(&Tok::Newline) || self.check_op(Op::Semicolon) {
                None
            } else {
                Some(self.expr_or_tuple()?)
            };
            return Ok(self.mk_stmt(StmtKind::Return { value }, line));
        }
        if self.check_kw(Kw::Assert) {
            self.advance();
            let cond = self.expr()?;
            if self.check_op(Op::Comma) {
                return Err(FrontendError::Unsupported {
                    construct: "assert with message".into(),
                    line,
                });
            }
            return Ok(self.mk_stmt(StmtKind::Assert { cond }, line));
        }
        if self.check_kw(Kw::Pass) {
            self.advance();
            return Ok(self.mk_stmt(StmtKind::Pass, line));
        }
        // assignment / aug-assignment / expression statement
        let first = self.expr_or_tuple()?;
        if let Some(op) = self.peek_aug_op() {
            self.advance();
            let value = self.expr()?;
            let target = expr_to_target(first, line)?;
            return Ok(self.mk_stmt(StmtKind::AugAssign { target, op, value }, line));
        }
        if self.check_op(Op::Assign) {
            self.advance();
            let value = self.expr_or_tuple()?;
            if self.check_op(Op::Assign) {
                return Err(FrontendError::Unsupported {
                    construct: "chained assignment".into(),
                    line,
                });
            }
            let targets = match first.kind {
                ExprKind::Tuple(items) => items
                    .into_iter()
                    .map(|e| expr_to_target(e, line))
                    .collect::<Result<Vec<_>, _>>()?,
                _ => vec![expr_to_target(first, line)?],
            };
            // Parallel assignment requires matching arity when the value is a
            // tuple; a single target may take any expression.
            if targets.len() > 1 {
                match &value.kind {
                    ExprKind::Tuple(items) if items.len() == targets.len() => {}
                    _ => {
                        return Err(FrontendError::Syntax {
                            line,
                            col: 1,
                            message: "parallel assignment arity mismatch".into(),
                        })
                    }
                }
            }
            return Ok(self.mk_stmt(StmtKind::Assign { targets, value }, line));
        }
        if let ExprKind::Tuple(_) = first.kind {
            return Err(FrontendError::Syntax {
                line,
                col: 1,
                message: "tuple expression is only allowed in assignments".into(),
            });
        }
        Ok(self.mk_stmt(StmtKind::ExprStmt { value: first }, line))
    }

    fn peek_aug_op(&self) -> Option<BinOp> {
        match self.peek_tok() {
            Tok::Op(Op::PlusAssign) => Some(BinOp::Add),
            Tok::Op(Op::MinusAssign) => Some(BinOp::Sub),
            Tok::Op(Op::StarAssign) => Some(BinOp::Mul),
            Tok::Op(Op::SlashSlashAssign) => Some(BinOp::FloorDiv),
            Tok::Op(Op::SlashAssign) => Some(BinOp::TrueDiv),
            Tok::Op(Op::PercentAssign) => Some(BinOp::Mod),
            _ => None,
        }
    }

    /// Expression, possibly a top-level comma tuple (assignment contexts).
    fn expr_or_tuple(&mut self) -> Result<Expr, FrontendError> {
        let line = self.peek_line();
        let first = self.expr()?;
        if !self.check_op(Op::Comma) {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.check_op(Op::Comma) {
            self.advance();
            items.push(self.expr()?);
        }
        Ok(self.mk_expr(ExprKind::Tuple(items), line))
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, FrontendError> {
        let mut left = self.and_expr()?;
        while self.check_kw(Kw::Or) {
            let line = self.peek_line();
            self.advance();
            let right = self.and_expr()?;
            left = self.mk_expr(
                ExprKind::BoolOr { left: Box::new(left), right: Box::new(right) },
                line,
            );
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, FrontendError> {
        let mut left = self.not_expr()?;
        while self.check_kw(Kw::And) {
            let line = self.peek_line();
            self.advance();
            let right = self.not_expr()?;
            left = self.mk_expr(
                ExprKind::BoolAnd { left: Box::new(left), right: Box::new(right) },
                line,
            );
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<Expr, FrontendError> {
        if self.check_kw(Kw::Not) {
            let line = self.peek_line();
            self.advance();
            let inner = self.not_expr()?;
            return Ok(self.mk_expr(ExprKind::Not(Box::new(inner)), line));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, FrontendError> {
        let left = self.additive()?;
        let op = match self.peek_tok() {
            Tok::Op(Op::EqEq) => Some(CmpOp::Eq),
            Tok::Op(Op::NotEq) => Some(CmpOp::Ne),
            Tok::Op(Op::Lt) => Some(CmpOp::Lt),
            Tok::Op(Op::Le) => Some(CmpOp::Le),
            Tok::Op(Op::Gt) => Some(CmpOp::Gt),
            Tok::Op(Op::Ge) => Some(CmpOp::Ge),
            _ => None,
        };
        let Some(op) = op else { return Ok(left) };
        let line = self.peek_line();
        self.advance();
        let right = self.additive()?;
        if matches!(
            self.peek_tok(),
            Tok::Op(Op::EqEq | Op::NotEq | Op::Lt | Op::Le | Op::Gt | Op::Ge)
        ) {
            return Err(FrontendError::Unsupported {
                construct: "chained comparison".into(),
                line,
            });
        }
        Ok(self.mk_expr(
            ExprKind::Compare { op, left: Box::new(left), right: Box::new(right) },
            line,
        ))
    }

    fn additive(&mut self) -> Result<Expr, FrontendError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = match self.peek_tok() {
                Tok::Op(Op::Plus) => BinOp::Add,
                Tok::Op(Op::Minus) => BinOp::Sub,
                _ => break,
            };
            let line = self.peek_line();
            self.advance();
            let right = self.multiplicative()?;
            left = self.mk_expr(
                ExprKind::Binary { op, left: Box::new(left), right: Box::new(right) },
                line,
            );
        }
        Ok(left)
    }

    fn multiplicative(&mut self) -> Result<Expr, FrontendError> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek_tok() {
                Tok::Op(Op::Star) => BinOp::Mul,
                Tok::Op(Op::SlashSlash) => BinOp::FloorDiv,
                Tok::Op(Op::Slash) => BinOp::TrueDiv,
                Tok::Op(Op::Percent) => BinOp::Mod,
                _ => break,
            };
            let line = self.peek_line();
            self.advance();
            let right = self.unary()?;
            left = self.mk_expr(
                ExprKind::Binary { op, left: Box::new(left), right: Box::new(right) },
                line,
            );
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        if self.check_op(Op::Minus) {
            let line = self.peek_line();
            self.advance();
            let inner = self.unary()?;
            // Fold a negated literal so `-1` round-trips as written.
            if let ExprKind::Int(n) = inner.kind {
                return Ok(self.mk_expr(ExprKind::Int(-n), line));
            }
            return Ok(self.mk_expr(ExprKind::Neg(Box::new(inner)), line));
        }
        if self.check_op(Op::Plus) {
            self.advance();
            return self.unary();
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, FrontendError> {
        let mut base = self.atom()?;
        loop {
            if self.check_op(Op::LBracket) {
                let line = self.peek_line();
                self.advance();
                // slice or index
                let lo = if self.check_op(Op::Colon) { None } else { Some(Box::new(self.expr()?)) };
                if self.check_op(Op::Colon) {
                    self.advance();
                    let hi = if self.check_op(Op::RBracket) {
                        None
                    } else {
                        Some(Box::new(self.expr()?))
                    };
                    self.expect_op(Op::RBracket)?;
                    base = self.mk_expr(ExprKind::Slice { base: Box::new(base), lo, hi }, line);
                } else {
                    self.expect_op(Op::RBracket)?;
                    let index = lo.ok_or(FrontendError::Syntax {
                        line,
                        col: 1,
                        message: "empty index".into(),
                    })?;
                    base = self.mk_expr(ExprKind::Index { base: Box::new(base), index }, line);
                }
            } else if self.check_op(Op::Dot) {
                let line = self.peek_line();
                self.advance();
                let method = self.expect_ident()?;
                if method != "append" && method != "extend" {
                    return Err(FrontendError::Unsupported {
                        construct: format!("method '{method}'"),
                        line,
                    });
                }
                self.expect_op(Op::LParen)?;
                let mut args = Vec::new();
                if !self.check_op(Op::RParen) {
                    args.push(self.expr()?);
                    while self.check_op(Op::Comma) {
                        self.advance();
                        args.push(self.expr()?);
                    }
                }
                self.expect_op(Op::RParen)?;
                base = self.mk_expr(
                    ExprKind::MethodCall { recv: Box::new(base), method, args },
                    line,
                );
            } else {
                break;
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, FrontendError> {
        let line = self.peek_line();
        match self.peek_tok().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(self.mk_expr(ExprKind::Int(n), line))
            }
            Tok::Kw(Kw::True) => {
                self.advance();
                Ok(self.mk_expr(ExprKind::Bool(true), line))
            }
            Tok::Kw(Kw::False) => {
                self.advance();
                Ok(self.mk_expr(ExprKind::Bool(false), line))
            }
            Tok::Kw(Kw::None) => {
                self.advance();
                Ok(self.mk_expr(ExprKind::NoneLit, line))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.check_op(Op::LParen) {
                    self.advance();
                    let mut args = Vec::new();
                    if !self.check_op(Op::RParen) {
                        args.push(self.expr()?);
                        while self.check_op(Op::Comma) {
                            self.advance();
                            args.push(self.expr()?);
                        }
                    }
                    self.expect_op(Op::RParen)?;
                    Ok(self.mk_expr(ExprKind::Call { callee: name, args }, line))
                } else {
                    Ok(self.mk_expr(ExprKind::Var(name), line))
                }
            }
            Tok::Op(Op::LParen) => {
                self.advance();
                let inner = self.expr()?;
                if self.check_op(Op::Comma) {
                    return Err(FrontendError::Unsupported {
                        construct: "tuple literal".into(),
                        line,
                    });
                }
                self.expect_op(Op::RParen)?;
                Ok(inner)
            }
            Tok::Op(Op::LBracket) => {
                self.advance();
                if self.check_op(Op::RBracket) {
                    self.advance();
                    return Ok(self.mk_expr(ExprKind::ListLit(Vec::new()), line));
                }
                let first = self.expr()?;
                if self.check_kw(Kw::For) {
                    self.advance();
                    let var = self.expect_ident()?;
                    self.expect_kw(Kw::In, "expected 'in' in comprehension")?;
                    let iter = self.expr()?;
                    let cond = if self.check_kw(Kw::If) {
                        self.advance();
                        Some(Box::new(self.expr()?))
                    } else {
                        None
                    };
                    self.expect_op(Op::RBracket)?;
                    return Ok(self.mk_expr(
                        ExprKind::ListComp { elem: Box::new(first), var, iter: Box::new(iter), cond },
                        line,
                    ));
                }
                let mut items = vec![first];
                while self.check_op(Op::Comma) {
                    self.advance();
                    items.push(self.expr()?);
                }
                self.expect_op(Op::RBracket)?;
                Ok(self.mk_expr(ExprKind::ListLit(items), line))
            }
            other => Err(FrontendError::Syntax {
                line,
                col: self.peek_col(),
                message: format!("unexpected token {other:?}"),
            }),
        }
    }

    // -- token plumbing --------------------------------------------------

    fn mk_stmt(&mut self, kind: StmtKind, line: u32) -> Stmt {
        let id = self.next_stmt_id;
        self.next_stmt_id += 1;
        Stmt { kind, line, id }
    }

    fn mk_expr(&mut self, kind: ExprKind, line: u32) -> Expr {
        let id = self.next_expr_id;
        self.next_expr_id += 1;
        Expr { kind, line, id }
    }

    fn peek_tok(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|t| &t.tok)
    }

    fn peek_line(&self) -> u32 {
        self.tokens[self.pos].line
    }

    fn peek_col(&self) -> u32 {
        self.tokens[self.pos].col
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek_tok(), Tok::Eof)
    }

    fn advance(&mut self) {
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
    }

    fn check(&self, tok: &Tok) -> bool {
        self.peek_tok() == tok
    }

    fn check_op(&self, op: Op) -> bool {
        matches!(self.peek_tok(), Tok::Op(o) if *o == op)
    }

    fn check_kw(&self, kw: Kw) -> bool {
        matches!(self.peek_tok(), Tok::Kw(k) if *k == kw)
    }

    fn expect_op(&mut self, op: Op) -> Result<(), FrontendError> {
        if self.check_op(op) {
            self.advance();
            Ok(())
        } else {
            Err(FrontendError::Syntax {
                line: self.peek_line(),
                col: self.peek_col(),
                message: format!("expected {op:?}, found {:?}", self.peek_tok()),
            })
        }
    }

    fn expect_kw(&mut self, kw: Kw, msg: &str) -> Result<(), FrontendError> {
        if self.check_kw(kw) {
            self.advance();
            Ok(())
        } else {
            Err(FrontendError::Syntax {
                line: self.peek_line(),
                col: self.peek_col(),
                message: format!("{msg}, found {:?}", self.peek_tok()),
            })
        }
    }

    fn expect_ident(&mut self) -> Result<String, FrontendError> {
        match self.peek_tok().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            other => Err(FrontendError::Syntax {
                line: self.peek_line(),
                col: self.peek_col(),
                message: format!("expected identifier, found {other:?}"),
            }),
        }
    }

    fn expect_newline(&mut self) -> Result<(), FrontendError> {
        if self.check(&Tok::Newline) {
            self.advance();
            Ok(())
        } else if self.at_eof() || self.check(&Tok::Dedent) {
            Ok(())
        } else {
            Err(FrontendError::Syntax {
                line: self.peek_line(),
                col: self.peek_col(),
                message: format!("expected end of line, found {:?}", self.peek_tok()),
            })
        }
    }

    fn skip_newlines(&mut self) {
        while self.check(&Tok::Newline) {
            self.advance();
        }
    }
}

fn expr_to_target(e: Expr, line: u32) -> Result<Target, FrontendError> {
    match e.kind {
        ExprKind::Var(name) => Ok(Target::Name(name)),
        ExprKind::Index { base, index } => match base.kind {
            ExprKind::Var(name) => Ok(Target::Index { base: name, index: *index }),
            _ => Err(FrontendError::Syntax {
                line,
                col: 1,
                message: "index assignment target must be a plain variable".into(),
            }),
        },
        _ => Err(FrontendError::Syntax {
            line,
            col: 1,
            message: "invalid assignment target".into(),
        }),
    }
}

fn to_owned_name(s: &str) -> String {
    s.to_string()
}
