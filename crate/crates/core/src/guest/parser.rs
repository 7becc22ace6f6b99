//! Recursive-descent parser for the guest scripting language.
//!
//! Parses the statement and expression grammar that generated `solve`
//! programs actually use: full expression precedence (lambdas, ternaries,
//! comprehensions, generator expressions, slices, starred/keyword call
//! arguments), and the standard statement set. The parser is deliberately
//! permissive — it accepts a superset of the real grammar in a few corners
//! (walrus placement, decorator expressions) because analyses only need
//! structure, and real syntax enforcement happens in the interpreter.

use super::ast::*;
use super::lexer::{lex, Comment, Diagnostic, Kw, LexedSource, Tok, Token};

/// Outcome of parsing a source file. `comments` are available even when the
/// module failed to parse, so token-level scans still work.
pub struct ParseResult {
    pub module: Option<Module>,
    pub comments: Vec<Comment>,
    pub error: Option<Diagnostic>,
}

/// Lex and parse a full source file.
pub fn parse(source: &str) -> ParseResult {
    let LexedSource {
        tokens,
        comments,
        error,
    } = lex(source);
    if let Some(error) = error {
        return ParseResult {
            module: None,
            comments,
            error: Some(error),
        };
    }
    let mut parser = Parser { tokens, pos: 0 };
    match parser.parse_module() {
        Ok(module) => ParseResult {
            module: Some(module),
            comments,
            error: None,
        },
        Err(error) => ParseResult {
            module: None,
            comments,
            error: Some(error),
        },
    }
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const AUG_OPS: &[&str] = &[
    "+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=", "^=", "@=",
];

impl Parser {
    fn peek(&self) -> &Tok {
        self.tokens
            .get(self.pos)
            .map(|t| &t.tok)
            .unwrap_or(&Tok::Eof)
    }

    fn peek_ahead(&self, offset: usize) -> &Tok {
        self.tokens
            .get(self.pos + offset)
            .map(|t| &t.tok)
            .unwrap_or(&Tok::Eof)
    }

    fn line(&self) -> usize {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|t| t.line)
            .unwrap_or(1)
    }

    fn bump(&mut self) -> Tok {
        let tok = self.peek().clone();
        if self.pos < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn err(&self, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            line: self.line(),
            message: message.into(),
        }
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn at_kw(&self, kw: Kw) -> bool {
        matches!(self.peek(), Tok::Kw(k) if *k == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Kw) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{op}', found {}", describe(self.peek()))))
        }
    }

    fn expect_newline(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            other => Err(self.err(format!("expected end of line, found {}", describe(other)))),
        }
    }

    fn expect_name(&mut self) -> PResult<String> {
        match self.bump() {
            Tok::Name(n) => Ok(n),
            other => Err(self.err(format!("expected a name, found {}", describe(&other)))),
        }
    }

    // ── module / statements ─────────────────────────────────────────────

    fn parse_module(&mut self) -> PResult<Module> {
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Newline => {
                    self.bump();
                }
                _ => body.append(&mut self.parse_statement()?),
            }
        }
        Ok(Module { body })
    }

    /// One logical statement; simple lines may hold several `;`-joined ones.
    fn parse_statement(&mut self) -> PResult<Vec<Stmt>> {
        let line = self.line();
        match self.peek() {
            Tok::Kw(Kw::If) => Ok(vec![self.parse_if()?]),
            Tok::Kw(Kw::While) => Ok(vec![self.parse_while()?]),
            Tok::Kw(Kw::For) => Ok(vec![self.parse_for(false, line)?]),
            Tok::Kw(Kw::Try) => Ok(vec![self.parse_try()?]),
            Tok::Kw(Kw::With) => Ok(vec![self.parse_with(false, line)?]),
            Tok::Kw(Kw::Def) => Ok(vec![self.parse_def(Vec::new(), false, line)?]),
            Tok::Kw(Kw::Class) => Ok(vec![self.parse_class(Vec::new(), line)?]),
            Tok::Op("@") => self.parse_decorated(),
            Tok::Kw(Kw::Async) => {
                self.bump();
                let line = self.line();
                match self.peek() {
                    Tok::Kw(Kw::Def) => Ok(vec![self.parse_def(Vec::new(), true, line)?]),
                    Tok::Kw(Kw::For) => Ok(vec![self.parse_for(true, line)?]),
                    Tok::Kw(Kw::With) => Ok(vec![self.parse_with(true, line)?]),
                    other => Err(self.err(format!(
                        "expected 'def', 'for' or 'with' after 'async', found {}",
                        describe(other)
                    ))),
                }
            }
            _ => self.parse_simple_line(),
        }
    }

    fn parse_simple_line(&mut self) -> PResult<Vec<Stmt>> {
        let mut stmts = vec![self.parse_small_stmt()?];
        while self.eat_op(";") {
            if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                break;
            }
            stmts.push(self.parse_small_stmt()?);
        }
        self.expect_newline()?;
        Ok(stmts)
    }

    fn parse_small_stmt(&mut self) -> PResult<Stmt> {
        let line = self.line();
        let kind = match self.peek() {
            Tok::Kw(Kw::Return) => {
                self.bump();
                let value = if matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Op(";")) {
                    None
                } else {
                    Some(self.parse_testlist_star()?)
                };
                StmtKind::Return(value)
            }
            Tok::Kw(Kw::Pass) => {
                self.bump();
                StmtKind::Pass
            }
            Tok::Kw(Kw::Break) => {
                self.bump();
                StmtKind::Break
            }
            Tok::Kw(Kw::Continue) => {
                self.bump();
                StmtKind::Continue
            }
            Tok::Kw(Kw::Del) => {
                self.bump();
                let mut targets = vec![self.parse_test()?];
                while self.eat_op(",") {
                    if matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Op(";")) {
                        break;
                    }
                    targets.push(self.parse_test()?);
                }
                StmtKind::Del(targets)
            }
            Tok::Kw(Kw::Assert) => {
                self.bump();
                let test = self.parse_test()?;
                let msg = if self.eat_op(",") {
                    Some(self.parse_test()?)
                } else {
                    None
                };
                StmtKind::Assert { test, msg }
            }
            Tok::Kw(Kw::Global) => {
                self.bump();
                let mut names = vec![self.expect_name()?];
                while self.eat_op(",") {
                    names.push(self.expect_name()?);
                }
                StmtKind::Global(names)
            }
            Tok::Kw(Kw::Nonlocal) => {
                self.bump();
                let mut names = vec![self.expect_name()?];
                while self.eat_op(",") {
                    names.push(self.expect_name()?);
                }
                StmtKind::Nonlocal(names)
            }
            Tok::Kw(Kw::Import) => {
                self.bump();
                let mut names = vec![self.parse_dotted_as_name()?];
                while self.eat_op(",") {
                    names.push(self.parse_dotted_as_name()?);
                }
                StmtKind::Import(names)
            }
            Tok::Kw(Kw::From) => self.parse_from_import()?,
            Tok::Kw(Kw::Raise) => {
                self.bump();
                if matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Op(";")) {
                    StmtKind::Raise {
                        exc: None,
                        cause: None,
                    }
                } else {
                    let exc = self.parse_test()?;
                    let cause = if self.eat_kw(Kw::From) {
                        Some(self.parse_test()?)
                    } else {
                        None
                    };
                    StmtKind::Raise {
                        exc: Some(exc),
                        cause,
                    }
                }
            }
            Tok::Kw(Kw::Yield) => StmtKind::Expr(self.parse_yield_expr()?),
            _ => self.parse_expr_stmt()?,
        };
        Ok(Stmt { line, kind })
    }

    fn parse_dotted_as_name(&mut self) -> PResult<ImportName> {
        let mut name = self.expect_name()?;
        while self.at_op(".") {
            self.bump();
            name.push('.');
            name.push_str(&self.expect_name()?);
        }
        let alias = if self.eat_kw(Kw::As) {
            Some(self.expect_name()?)
        } else {
            None
        };
        Ok(ImportName { name, alias })
    }

    fn parse_from_import(&mut self) -> PResult<StmtKind> {
        self.bump(); // from
        let mut level = 0usize;
        loop {
            if self.at_op(".") {
                self.bump();
                level += 1;
            } else if self.at_op("...") {
                self.bump();
                level += 3;
            } else {
                break;
            }
        }
        let module = if matches!(self.peek(), Tok::Name(_)) {
            let mut name = self.expect_name()?;
            while self.at_op(".") {
                self.bump();
                name.push('.');
                name.push_str(&self.expect_name()?);
            }
            name
        } else {
            String::new()
        };
        if !self.eat_kw(Kw::Import) {
            return Err(self.err("expected 'import' in from-import"));
        }
        if self.eat_op("*") {
            return Ok(StmtKind::ImportFrom {
                module,
                level,
                names: Vec::new(),
                star: true,
            });
        }
        let parenthesized = self.eat_op("(");
        let mut names = Vec::new();
        loop {
            let name = self.expect_name()?;
            let alias = if self.eat_kw(Kw::As) {
                Some(self.expect_name()?)
            } else {
                None
            };
            names.push(ImportName { name, alias });
            if !self.eat_op(",") {
                break;
            }
            if parenthesized && self.at_op(")") {
                break;
            }
        }
        if parenthesized {
            self.expect_op(")")?;
        }
        Ok(StmtKind::ImportFrom {
            module,
            level,
            names,
            star: false,
        })
    }

    fn parse_expr_stmt(&mut self) -> PResult<StmtKind> {
        let first = self.parse_testlist_star()?;
        for aug in AUG_OPS {
            if self.at_op(aug) {
                self.bump();
                let value = self.parse_rhs()?;
                return Ok(StmtKind::AugAssign {
                    target: first,
                    op: aug,
                    value,
                });
            }
        }
        if self.at_op(":") {
            self.bump();
            let annotation = self.parse_test()?;
            let value = if self.eat_op("=") {
                Some(self.parse_rhs()?)
            } else {
                None
            };
            return Ok(StmtKind::AnnAssign {
                target: first,
                annotation,
                value,
            });
        }
        if self.at_op("=") {
            let mut targets = vec![first];
            let mut value = None;
            while self.eat_op("=") {
                let next = self.parse_rhs()?;
                if self.at_op("=") {
                    targets.push(next);
                } else {
                    value = Some(next);
                }
            }
            return Ok(StmtKind::Assign {
                targets,
                value: value.expect("assignment has a right-hand side"),
            });
        }
        Ok(StmtKind::Expr(first))
    }

    /// Right-hand side of an assignment: a testlist or a yield expression.
    fn parse_rhs(&mut self) -> PResult<Expr> {
        if self.at_kw(Kw::Yield) {
            self.parse_yield_expr()
        } else {
            self.parse_testlist_star()
        }
    }

    fn parse_yield_expr(&mut self) -> PResult<Expr> {
        self.bump(); // yield
        if self.eat_kw(Kw::From) {
            let value = self.parse_test()?;
            return Ok(Expr::Yield {
                value: Some(Box::new(value)),
                from: true,
            });
        }
        if matches!(
            self.peek(),
            Tok::Newline | Tok::Eof | Tok::Op(")") | Tok::Op(";")
        ) {
            return Ok(Expr::Yield {
                value: None,
                from: false,
            });
        }
        let value = self.parse_testlist_star()?;
        Ok(Expr::Yield {
            value: Some(Box::new(value)),
            from: false,
        })
    }

    // ── compound statements ─────────────────────────────────────────────

    fn parse_suite(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_op(":")?;
        if matches!(self.peek(), Tok::Newline) {
            self.bump();
            if !matches!(self.peek(), Tok::Indent) {
                return Err(self.err("expected an indented block"));
            }
            self.bump();
            let mut body = Vec::new();
            loop {
                match self.peek() {
                    Tok::Dedent => {
                        self.bump();
                        break;
                    }
                    Tok::Eof => break,
                    Tok::Newline => {
                        self.bump();
                    }
                    _ => body.append(&mut self.parse_statement()?),
                }
            }
            Ok(body)
        } else {
            // Inline suite: `if x: return 1`
            self.parse_simple_line()
        }
    }

    fn parse_if(&mut self) -> PResult<Stmt> {
        let line = self.line();
        self.bump(); // if
        let mut branches = Vec::new();
        let test = self.parse_namedexpr()?;
        let body = self.parse_suite()?;
        branches.push((test, body));
        let mut orelse = Vec::new();
        loop {
            if self.at_kw(Kw::Elif) {
                self.bump();
                let test = self.parse_namedexpr()?;
                let body = self.parse_suite()?;
                branches.push((test, body));
            } else if self.at_kw(Kw::Else) {
                self.bump();
                orelse = self.parse_suite()?;
                break;
            } else {
                break;
            }
        }
        Ok(Stmt {
            line,
            kind: StmtKind::If { branches, orelse },
        })
    }

    fn parse_while(&mut self) -> PResult<Stmt> {
        let line = self.line();
        self.bump();
        let test = self.parse_namedexpr()?;
        let body = self.parse_suite()?;
        let orelse = if self.eat_kw(Kw::Else) {
            self.parse_suite()?
        } else {
            Vec::new()
        };
        Ok(Stmt {
            line,
            kind: StmtKind::While { test, body, orelse },
        })
    }

    fn parse_for(&mut self, is_async: bool, line: usize) -> PResult<Stmt> {
        self.bump(); // for
        let target = self.parse_target_list()?;
        if !self.eat_kw(Kw::In) {
            return Err(self.err("expected 'in' in for statement"));
        }
        let iter = self.parse_testlist_star()?;
        let body = self.parse_suite()?;
        let orelse = if self.eat_kw(Kw::Else) {
            self.parse_suite()?
        } else {
            Vec::new()
        };
        Ok(Stmt {
            line,
            kind: StmtKind::For {
                target,
                iter,
                body,
                orelse,
                is_async,
            },
        })
    }

    fn parse_with(&mut self, is_async: bool, line: usize) -> PResult<Stmt> {
        self.bump(); // with
        let mut items = Vec::new();
        loop {
            let ctx = self.parse_test()?;
            let binding = if self.eat_kw(Kw::As) {
                Some(self.parse_postfix_target()?)
            } else {
                None
            };
            items.push((ctx, binding));
            if !self.eat_op(",") {
                break;
            }
        }
        let body = self.parse_suite()?;
        Ok(Stmt {
            line,
            kind: StmtKind::With {
                items,
                body,
                is_async,
            },
        })
    }

    fn parse_try(&mut self) -> PResult<Stmt> {
        let line = self.line();
        self.bump(); // try
        let body = self.parse_suite()?;
        let mut handlers = Vec::new();
        while self.at_kw(Kw::Except) {
            self.bump();
            let typ = if self.at_op(":") {
                None
            } else {
                Some(self.parse_test()?)
            };
            let name = if self.eat_kw(Kw::As) {
                Some(self.expect_name()?)
            } else {
                None
            };
            let body = self.parse_suite()?;
            handlers.push(ExceptHandler { typ, name, body });
        }
        let orelse = if self.eat_kw(Kw::Else) {
            self.parse_suite()?
        } else {
            Vec::new()
        };
        let finalbody = if self.eat_kw(Kw::Finally) {
            self.parse_suite()?
        } else {
            Vec::new()
        };
        if handlers.is_empty() && finalbody.is_empty() {
            return Err(self.err("try statement needs an 'except' or 'finally' clause"));
        }
        Ok(Stmt {
            line,
            kind: StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            },
        })
    }

    fn parse_decorated(&mut self) -> PResult<Vec<Stmt>> {
        let mut decorators = Vec::new();
        while self.at_op("@") {
            self.bump();
            decorators.push(self.parse_namedexpr()?);
            self.expect_newline()?;
            while matches!(self.peek(), Tok::Newline) {
                self.bump();
            }
        }
        let line = self.line();
        match self.peek() {
            Tok::Kw(Kw::Def) => Ok(vec![self.parse_def(decorators, false, line)?]),
            Tok::Kw(Kw::Class) => Ok(vec![self.parse_class(decorators, line)?]),
            Tok::Kw(Kw::Async) => {
                self.bump();
                Ok(vec![self.parse_def(decorators, true, self.line())?])
            }
            other => Err(self.err(format!(
                "expected 'def' or 'class' after decorator, found {}",
                describe(other)
            ))),
        }
    }

    fn parse_def(&mut self, decorators: Vec<Expr>, is_async: bool, line: usize) -> PResult<Stmt> {
        self.bump(); // def
        let name = self.expect_name()?;
        self.expect_op("(")?;
        let params = self.parse_params(true)?;
        self.expect_op(")")?;
        if self.eat_op("->") {
            self.parse_test()?; // return annotation, not retained
        }
        let body = self.parse_suite()?;
        Ok(Stmt {
            line,
            kind: StmtKind::FuncDef(FuncDef {
                name,
                params,
                body,
                decorators,
                is_async,
                line,
            }),
        })
    }

    fn parse_class(&mut self, decorators: Vec<Expr>, line: usize) -> PResult<Stmt> {
        self.bump(); // class
        let name = self.expect_name()?;
        let mut bases = Vec::new();
        if self.eat_op("(") {
            bases = self.parse_call_args()?;
        }
        let body = self.parse_suite()?;
        Ok(Stmt {
            line,
            kind: StmtKind::ClassDef {
                name,
                bases,
                body,
                decorators,
            },
        })
    }

    /// Parameter list for defs (`annotated = true`) or lambdas.
    fn parse_params(&mut self, annotated: bool) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        loop {
            match self.peek() {
                Tok::Op(")") | Tok::Op(":") if !self.at_op(":") || !annotated => break,
                Tok::Op(")") => break,
                _ => {}
            }
            if !annotated && self.at_op(":") {
                break;
            }
            if self.at_op("*") {
                self.bump();
                if matches!(self.peek(), Tok::Name(_)) {
                    let name = self.expect_name()?;
                    let annotation = if annotated && self.eat_op(":") {
                        Some(self.parse_test()?)
                    } else {
                        None
                    };
                    params.push(Param {
                        name: Some(name),
                        star: 1,
                        default: None,
                        annotation,
                    });
                } else {
                    params.push(Param {
                        name: None,
                        star: 1,
                        default: None,
                        annotation: None,
                    });
                }
            } else if self.at_op("**") {
                self.bump();
                let name = self.expect_name()?;
                let annotation = if annotated && self.eat_op(":") {
                    Some(self.parse_test()?)
                } else {
                    None
                };
                params.push(Param {
                    name: Some(name),
                    star: 2,
                    default: None,
                    annotation,
                });
            } else if self.at_op("/") {
                self.bump();
                params.push(Param {
                    name: None,
                    star: 0,
                    default: None,
                    annotation: None,
                });
            } else {
                let name = self.expect_name()?;
                let annotation = if annotated && self.eat_op(":") {
                    Some(self.parse_test()?)
                } else {
                    None
                };
                let default = if self.eat_op("=") {
                    Some(self.parse_test()?)
                } else {
                    None
                };
                params.push(Param {
                    name: Some(name),
                    star: 0,
                    default,
                    annotation,
                });
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(params)
    }

    // ── expressions ─────────────────────────────────────────────────────

    /// Comma-separated tests with optional star items; a single expr stays
    /// bare, more than one folds into a tuple.
    fn parse_testlist_star(&mut self) -> PResult<Expr> {
        let first = self.parse_star_or_namedexpr()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.list_end() {
                break;
            }
            items.push(self.parse_star_or_namedexpr()?);
        }
        Ok(Expr::Tuple(items))
    }

    fn list_end(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Newline
                | Tok::Eof
                | Tok::Op(")")
                | Tok::Op("]")
                | Tok::Op("}")
                | Tok::Op(";")
                | Tok::Op(":")
                | Tok::Op("=")
        ) || matches!(self.peek(), Tok::Kw(Kw::In))
    }

    fn parse_star_or_namedexpr(&mut self) -> PResult<Expr> {
        if self.at_op("*") {
            self.bump();
            let value = self.parse_or_test()?;
            return Ok(Expr::Starred(Box::new(value)));
        }
        self.parse_namedexpr()
    }

    fn parse_namedexpr(&mut self) -> PResult<Expr> {
        let expr = self.parse_test()?;
        if self.at_op(":=") {
            self.bump();
            let value = self.parse_test()?;
            return Ok(Expr::Named {
                target: Box::new(expr),
                value: Box::new(value),
            });
        }
        Ok(expr)
    }

    fn parse_test(&mut self) -> PResult<Expr> {
        if self.at_kw(Kw::Lambda) {
            return self.parse_lambda();
        }
        let body = self.parse_or_test()?;
        if self.at_kw(Kw::If) {
            self.bump();
            let test = self.parse_or_test()?;
            if !self.eat_kw(Kw::Else) {
                return Err(self.err("expected 'else' in conditional expression"));
            }
            let orelse = self.parse_test()?;
            return Ok(Expr::IfExp {
                test: Box::new(test),
                body: Box::new(body),
                orelse: Box::new(orelse),
            });
        }
        Ok(body)
    }

    fn parse_lambda(&mut self) -> PResult<Expr> {
        self.bump(); // lambda
        let params = self.parse_params(false)?;
        self.expect_op(":")?;
        let body = self.parse_test()?;
        Ok(Expr::Lambda {
            params,
            body: Box::new(body),
        })
    }

    fn parse_or_test(&mut self) -> PResult<Expr> {
        let first = self.parse_and_test()?;
        if !self.at_kw(Kw::Or) {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw(Kw::Or) {
            values.push(self.parse_and_test()?);
        }
        Ok(Expr::BoolChain { op: "or", values })
    }

    fn parse_and_test(&mut self) -> PResult<Expr> {
        let first = self.parse_not_test()?;
        if !self.at_kw(Kw::And) {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw(Kw::And) {
            values.push(self.parse_not_test()?);
        }
        Ok(Expr::BoolChain { op: "and", values })
    }

    fn parse_not_test(&mut self) -> PResult<Expr> {
        if self.eat_kw(Kw::Not) {
            let operand = self.parse_not_test()?;
            return Ok(Expr::Unary {
                op: "not",
                operand: Box::new(operand),
            });
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> PResult<Expr> {
        let left = self.parse_bit_or()?;
        let mut ops: Vec<&'static str> = Vec::new();
        let mut comparators = Vec::new();
        loop {
            let op: &'static str = match self.peek() {
                Tok::Op("<") => "<",
                Tok::Op(">") => ">",
                Tok::Op("<=") => "<=",
                Tok::Op(">=") => ">=",
                Tok::Op("==") => "==",
                Tok::Op("!=") => "!=",
                Tok::Kw(Kw::In) => "in",
                Tok::Kw(Kw::Not) if matches!(self.peek_ahead(1), Tok::Kw(Kw::In)) => {
                    self.bump();
                    "not in"
                }
                Tok::Kw(Kw::Is) => {
                    if matches!(self.peek_ahead(1), Tok::Kw(Kw::Not)) {
                        self.bump();
                        "is not"
                    } else {
                        "is"
                    }
                }
                _ => break,
            };
            self.bump();
            ops.push(op);
            comparators.push(self.parse_bit_or()?);
        }
        if ops.is_empty() {
            return Ok(left);
        }
        Ok(Expr::Compare {
            left: Box::new(left),
            ops,
            comparators,
        })
    }

    fn parse_bit_or(&mut self) -> PResult<Expr> {
        let mut left = self.parse_bit_xor()?;
        while self.at_op("|") {
            self.bump();
            let right = self.parse_bit_xor()?;
            left = binary(left, "|", right);
        }
        Ok(left)
    }

    fn parse_bit_xor(&mut self) -> PResult<Expr> {
        let mut left = self.parse_bit_and()?;
        while self.at_op("^") {
            self.bump();
            let right = self.parse_bit_and()?;
            left = binary(left, "^", right);
        }
        Ok(left)
    }

    fn parse_bit_and(&mut self) -> PResult<Expr> {
        let mut left = self.parse_shift()?;
        while self.at_op("&") {
            self.bump();
            let right = self.parse_shift()?;
            left = binary(left, "&", right);
        }
        Ok(left)
    }

    fn parse_shift(&mut self) -> PResult<Expr> {
        let mut left = self.parse_arith()?;
        loop {
            let op = match self.peek() {
                Tok::Op("<<") => "<<",
                Tok::Op(">>") => ">>",
                _ => break,
            };
            self.bump();
            let right = self.parse_arith()?;
            left = binary(left, op, right);
        }
        Ok(left)
    }

    fn parse_arith(&mut self) -> PResult<Expr> {
        let mut left = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Tok::Op("+") => "+",
                Tok::Op("-") => "-",
                _ => break,
            };
            self.bump();
            let right = self.parse_term()?;
            left = binary(left, op, right);
        }
        Ok(left)
    }

    fn parse_term(&mut self) -> PResult<Expr> {
        let mut left = self.parse_factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op("*") => "*",
                Tok::Op("/") => "/",
                Tok::Op("//") => "//",
                Tok::Op("%") => "%",
                Tok::Op("@") => "@",
                _ => break,
            };
            self.bump();
            let right = self.parse_factor()?;
            left = binary(left, op, right);
        }
        Ok(left)
    }

    fn parse_factor(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Tok::Op("+") => Some("+"),
            Tok::Op("-") => Some("-"),
            Tok::Op("~") => Some("~"),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let operand = self.parse_factor()?;
            return Ok(Expr::Unary {
                op,
                operand: Box::new(operand),
            });
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> PResult<Expr> {
        let base = self.parse_await_postfix()?;
        if self.at_op("**") {
            self.bump();
            let exp = self.parse_factor()?;
            return Ok(binary(base, "**", exp));
        }
        Ok(base)
    }

    fn parse_await_postfix(&mut self) -> PResult<Expr> {
        if self.eat_kw(Kw::Await) {
            let inner = self.parse_await_postfix()?;
            return Ok(Expr::Await(Box::new(inner)));
        }
        self.parse_postfix()
    }

    /// Restricted postfix expression usable as a binding target (with/except).
    fn parse_postfix_target(&mut self) -> PResult<Expr> {
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.parse_atom()?;
        loop {
            if self.at_op("(") {
                self.bump();
                let args = self.parse_call_args()?;
                expr = Expr::Call {
                    func: Box::new(expr),
                    args,
                };
            } else if self.at_op("[") {
                self.bump();
                let index = self.parse_subscript()?;
                self.expect_op("]")?;
                expr = Expr::Subscript {
                    value: Box::new(expr),
                    index: Box::new(index),
                };
            } else if self.at_op(".") {
                self.bump();
                let attr = self.expect_name()?;
                expr = Expr::Attribute {
                    value: Box::new(expr),
                    attr,
                };
            } else {
                break;
            }
        }
        Ok(expr)
    }

    /// Arguments of a call, after the opening parenthesis; consumes `)`.
    fn parse_call_args(&mut self) -> PResult<Vec<CallArg>> {
        let mut args = Vec::new();
        loop {
            if self.at_op(")") {
                self.bump();
                break;
            }
            if self.at_op("*") {
                self.bump();
                args.push(CallArg::Star(self.parse_test()?));
            } else if self.at_op("**") {
                self.bump();
                args.push(CallArg::DoubleStar(self.parse_test()?));
            } else {
                let expr = self.parse_test()?;
                if self.at_op("=") {
                    if let Expr::Name(name) = &expr {
                        let name = name.clone();
                        self.bump();
                        let value = self.parse_test()?;
                        args.push(CallArg::Keyword(name, value));
                    } else {
                        return Err(self.err("keyword argument needs a plain name"));
                    }
                } else if self.at_op(":=") {
                    self.bump();
                    let value = self.parse_test()?;
                    args.push(CallArg::Positional(Expr::Named {
                        target: Box::new(expr),
                        value: Box::new(value),
                    }));
                } else if self.at_kw(Kw::For)
                    || (self.at_kw(Kw::Async) && matches!(self.peek_ahead(1), Tok::Kw(Kw::For)))
                {
                    // Bare generator expression as the sole argument.
                    let generators = self.parse_comp_clauses()?;
                    args.push(CallArg::Positional(Expr::Comp {
                        kind: CompKind::Generator,
                        elements: vec![expr],
                        generators,
                    }));
                } else {
                    args.push(CallArg::Positional(expr));
                }
            }
            if !self.eat_op(",") {
                self.expect_op(")")?;
                break;
            }
        }
        Ok(args)
    }

    fn parse_subscript(&mut self) -> PResult<Expr> {
        let mut items = Vec::new();
        loop {
            items.push(self.parse_slice_item()?);
            if !self.eat_op(",") {
                break;
            }
            if self.at_op("]") {
                break;
            }
        }
        if items.len() == 1 {
            Ok(items.pop().expect("one item"))
        } else {
            Ok(Expr::Tuple(items))
        }
    }

    fn parse_slice_item(&mut self) -> PResult<Expr> {
        let lower = if self.at_op(":") {
            None
        } else {
            Some(Box::new(self.parse_test()?))
        };
        if !self.at_op(":") {
            return Ok(lower.map(|b| *b).expect("either a bound or a colon"));
        }
        self.bump(); // ':'
        let upper = if self.at_op(":") || self.at_op("]") || self.at_op(",") {
            None
        } else {
            Some(Box::new(self.parse_test()?))
        };
        let step = if self.eat_op(":") {
            if self.at_op("]") || self.at_op(",") {
                None
            } else {
                Some(Box::new(self.parse_test()?))
            }
        } else {
            None
        };
        Ok(Expr::Slice { lower, upper, step })
    }

    fn parse_target_list(&mut self) -> PResult<Expr> {
        let mut items = Vec::new();
        loop {
            if self.at_op("*") {
                self.bump();
                let inner = self.parse_postfix()?;
                items.push(Expr::Starred(Box::new(inner)));
            } else if self.at_op("(") || self.at_op("[") {
                // Nested unpacking target.
                let close = if self.at_op("(") { ")" } else { "]" };
                self.bump();
                let inner = self.parse_target_list()?;
                self.expect_op(close)?;
                items.push(inner);
            } else {
                items.push(self.parse_postfix()?);
            }
            if !self.eat_op(",") {
                break;
            }
            if self.at_kw(Kw::In) || self.at_op("=") {
                break;
            }
        }
        if items.len() == 1 {
            Ok(items.pop().expect("one item"))
        } else {
            Ok(Expr::Tuple(items))
        }
    }

    fn parse_comp_clauses(&mut self) -> PResult<Vec<Comprehension>> {
        let mut generators = Vec::new();
        loop {
            let is_async = if self.at_kw(Kw::Async) {
                self.bump();
                true
            } else {
                false
            };
            if !self.eat_kw(Kw::For) {
                if is_async {
                    return Err(self.err("expected 'for' after 'async' in comprehension"));
                }
                break;
            }
            let target = self.parse_target_list()?;
            if !self.eat_kw(Kw::In) {
                return Err(self.err("expected 'in' in comprehension"));
            }
            let iter = self.parse_or_test()?;
            let mut ifs = Vec::new();
            while self.at_kw(Kw::If) {
                self.bump();
                ifs.push(self.parse_or_test_namedexpr()?);
            }
            generators.push(Comprehension {
                target,
                iter,
                ifs,
                is_async,
            });
            if !(self.at_kw(Kw::For) || self.at_kw(Kw::Async)) {
                break;
            }
        }
        Ok(generators)
    }

    fn parse_or_test_namedexpr(&mut self) -> PResult<Expr> {
        let expr = self.parse_or_test()?;
        if self.at_op(":=") {
            self.bump();
            let value = self.parse_test()?;
            return Ok(Expr::Named {
                target: Box::new(expr),
                value: Box::new(value),
            });
        }
        Ok(expr)
    }

    fn parse_atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Name(name) => {
                self.bump();
                Ok(Expr::Name(name))
            }
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::BigInt(raw) => {
                self.bump();
                Ok(Expr::BigInt(raw))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Expr::Float(v))
            }
            Tok::Str { .. } => self.parse_string_group(),
            Tok::Kw(Kw::True) => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Kw(Kw::False) => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Kw(Kw::None) => {
                self.bump();
                Ok(Expr::NoneLit)
            }
            Tok::Kw(Kw::Lambda) => self.parse_lambda(),
            Tok::Op("...") => {
                self.bump();
                Ok(Expr::EllipsisLit)
            }
            Tok::Op("(") => self.parse_paren(),
            Tok::Op("[") => self.parse_list_display(),
            Tok::Op("{") => self.parse_braced_display(),
            other => Err(self.err(format!("unexpected {}", describe(&other)))),
        }
    }

    /// Adjacent string literals concatenate; an f-string anywhere makes the
    /// combined value opaque.
    fn parse_string_group(&mut self) -> PResult<Expr> {
        let mut combined: Option<String> = Some(String::new());
        let mut any_bytes = false;
        while let Tok::Str { value, bytes, .. } = self.peek().clone() {
            self.bump();
            any_bytes |= bytes;
            match (combined.as_mut(), value) {
                (Some(acc), Some(v)) => acc.push_str(&v),
                _ => combined = None,
            }
        }
        if any_bytes {
            return Ok(Expr::Bytes);
        }
        Ok(Expr::Str(combined))
    }

    fn parse_paren(&mut self) -> PResult<Expr> {
        self.bump(); // '('
        if self.at_op(")") {
            self.bump();
            return Ok(Expr::Tuple(Vec::new()));
        }
        if self.at_kw(Kw::Yield) {
            let inner = self.parse_yield_expr()?;
            self.expect_op(")")?;
            return Ok(inner);
        }
        let first = self.parse_star_or_namedexpr()?;
        if self.at_kw(Kw::For)
            || (self.at_kw(Kw::Async) && matches!(self.peek_ahead(1), Tok::Kw(Kw::For)))
        {
            let generators = self.parse_comp_clauses()?;
            self.expect_op(")")?;
            return Ok(Expr::Comp {
                kind: CompKind::Generator,
                elements: vec![first],
                generators,
            });
        }
        if self.at_op(",") {
            let mut items = vec![first];
            while self.eat_op(",") {
                if self.at_op(")") {
                    break;
                }
                items.push(self.parse_star_or_namedexpr()?);
            }
            self.expect_op(")")?;
            return Ok(Expr::Tuple(items));
        }
        self.expect_op(")")?;
        Ok(first)
    }

    fn parse_list_display(&mut self) -> PResult<Expr> {
        self.bump(); // '['
        if self.at_op("]") {
            self.bump();
            return Ok(Expr::List(Vec::new()));
        }
        let first = self.parse_star_or_namedexpr()?;
        if self.at_kw(Kw::For)
            || (self.at_kw(Kw::Async) && matches!(self.peek_ahead(1), Tok::Kw(Kw::For)))
        {
            let generators = self.parse_comp_clauses()?;
            self.expect_op("]")?;
            return Ok(Expr::Comp {
                kind: CompKind::List,
                elements: vec![first],
                generators,
            });
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.parse_star_or_namedexpr()?);
        }
        self.expect_op("]")?;
        Ok(Expr::List(items))
    }

    fn parse_braced_display(&mut self) -> PResult<Expr> {
        self.bump(); // '{'
        if self.at_op("}") {
            self.bump();
            return Ok(Expr::Dict {
                keys: Vec::new(),
                values: Vec::new(),
            });
        }
        if self.at_op("**") {
            self.bump();
            let first_value = self.parse_or_test()?;
            return self.parse_dict_rest(vec![None], vec![first_value]);
        }
        let first = self.parse_star_or_namedexpr()?;
        if self.at_op(":") {
            self.bump();
            let first_value = self.parse_test()?;
            if self.at_kw(Kw::For)
                || (self.at_kw(Kw::Async) && matches!(self.peek_ahead(1), Tok::Kw(Kw::For)))
            {
                let generators = self.parse_comp_clauses()?;
                self.expect_op("}")?;
                return Ok(Expr::Comp {
                    kind: CompKind::Dict { key_is_first: true },
                    elements: vec![first, first_value],
                    generators,
                });
            }
            return self.parse_dict_rest(vec![Some(first)], vec![first_value]);
        }
        if self.at_kw(Kw::For)
            || (self.at_kw(Kw::Async) && matches!(self.peek_ahead(1), Tok::Kw(Kw::For)))
        {
            let generators = self.parse_comp_clauses()?;
            self.expect_op("}")?;
            return Ok(Expr::Comp {
                kind: CompKind::Set,
                elements: vec![first],
                generators,
            });
        }
        // Set display.
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            items.push(self.parse_star_or_namedexpr()?);
        }
        self.expect_op("}")?;
        Ok(Expr::Set(items))
    }

    fn parse_dict_rest(
        &mut self,
        mut keys: Vec<Option<Expr>>,
        mut values: Vec<Expr>,
    ) -> PResult<Expr> {
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            if self.at_op("**") {
                self.bump();
                keys.push(None);
                values.push(self.parse_or_test()?);
            } else {
                let key = self.parse_test()?;
                self.expect_op(":")?;
                let value = self.parse_test()?;
                keys.push(Some(key));
                values.push(value);
            }
        }
        self.expect_op("}")?;
        Ok(Expr::Dict { keys, values })
    }
}

fn binary(left: Expr, op: &'static str, right: Expr) -> Expr {
    Expr::Binary {
        left: Box::new(left),
        op,
        right: Box::new(right),
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Name(n) => format!("name '{n}'"),
        Tok::Kw(k) => format!("keyword '{k:?}'").to_lowercase(),
        Tok::Int(v) => format!("number {v}"),
        Tok::BigInt(v) => format!("number {v}"),
        Tok::Float(v) => format!("number {v}"),
        Tok::Str { .. } => "string literal".into(),
        Tok::Op(o) => format!("'{o}'"),
        Tok::Newline => "end of line".into(),
        Tok::Indent => "indent".into(),
        Tok::Dedent => "dedent".into(),
        Tok::Eof => "end of file".into(),
    }
}
