//! Abstract syntax tree for the guest scripting language.
//!
//! The tree keeps exactly what the structural analyses need: statement
//! shapes, definition/import structure, literal-ness of expressions, and
//! name/data flow into `return` statements. Line numbers ride on statements
//! for diagnostics.

/// A parsed source file.
#[derive(Debug, Clone)]
pub struct Module {
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub line: usize,
    pub kind: StmtKind,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    Expr(Expr),
    Assign {
        targets: Vec<Expr>,
        value: Expr,
    },
    AugAssign {
        target: Expr,
        op: &'static str,
        value: Expr,
    },
    AnnAssign {
        target: Expr,
        annotation: Expr,
        value: Option<Expr>,
    },
    Return(Option<Expr>),
    Pass,
    Break,
    Continue,
    Del(Vec<Expr>),
    Assert {
        test: Expr,
        msg: Option<Expr>,
    },
    Global(Vec<String>),
    Nonlocal(Vec<String>),
    Import(Vec<ImportName>),
    ImportFrom {
        module: String,
        level: usize,
        names: Vec<ImportName>,
        star: bool,
    },
    If {
        branches: Vec<(Expr, Vec<Stmt>)>,
        orelse: Vec<Stmt>,
    },
    While {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    For {
        target: Expr,
        iter: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
        is_async: bool,
    },
    With {
        items: Vec<(Expr, Option<Expr>)>,
        body: Vec<Stmt>,
        is_async: bool,
    },
    Try {
        body: Vec<Stmt>,
        handlers: Vec<ExceptHandler>,
        orelse: Vec<Stmt>,
        finalbody: Vec<Stmt>,
    },
    Raise {
        exc: Option<Expr>,
        cause: Option<Expr>,
    },
    FuncDef(FuncDef),
    ClassDef {
        name: String,
        bases: Vec<CallArg>,
        body: Vec<Stmt>,
        decorators: Vec<Expr>,
    },
}

#[derive(Debug, Clone)]
pub struct ImportName {
    /// Dotted module path (or bare name for `from x import name`).
    pub name: String,
    pub alias: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExceptHandler {
    pub typ: Option<Expr>,
    pub name: Option<String>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct FuncDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub decorators: Vec<Expr>,
    pub is_async: bool,
    pub line: usize,
}

impl FuncDef {
    /// Names of the plain positional/keyword parameters, in order.
    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().filter_map(|p| p.name.as_deref())
    }
}

#[derive(Debug, Clone)]
pub struct Param {
    /// `None` for the bare `*` keyword-only marker and the `/` marker.
    pub name: Option<String>,
    /// 0 plain, 1 `*args`, 2 `**kwargs`.
    pub star: u8,
    pub default: Option<Expr>,
    pub annotation: Option<Expr>,
}

#[derive(Debug, Clone)]
pub enum CallArg {
    Positional(Expr),
    Keyword(String, Expr),
    Star(Expr),
    DoubleStar(Expr),
}

impl CallArg {
    pub fn expr(&self) -> &Expr {
        match self {
            CallArg::Positional(e)
            | CallArg::Keyword(_, e)
            | CallArg::Star(e)
            | CallArg::DoubleStar(e) => e,
        }
    }
}

#[derive(Debug, Clone)]
pub enum CompKind {
    List,
    Set,
    Generator,
    Dict { key_is_first: bool },
}

#[derive(Debug, Clone)]
pub struct Comprehension {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
    pub is_async: bool,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Name(String),
    Int(i64),
    /// Integer literal that does not fit i64; still a constant.
    BigInt(String),
    Float(f64),
    /// `None` value means the literal's text is unknown (f-strings).
    Str(Option<String>),
    Bytes,
    Bool(bool),
    NoneLit,
    EllipsisLit,
    Tuple(Vec<Expr>),
    List(Vec<Expr>),
    Set(Vec<Expr>),
    Dict {
        /// `None` key marks a `**mapping` unpacking entry.
        keys: Vec<Option<Expr>>,
        values: Vec<Expr>,
    },
    Starred(Box<Expr>),
    Unary {
        op: &'static str,
        operand: Box<Expr>,
    },
    Binary {
        left: Box<Expr>,
        op: &'static str,
        right: Box<Expr>,
    },
    BoolChain {
        op: &'static str,
        values: Vec<Expr>,
    },
    Compare {
        left: Box<Expr>,
        ops: Vec<&'static str>,
        comparators: Vec<Expr>,
    },
    IfExp {
        test: Box<Expr>,
        body: Box<Expr>,
        orelse: Box<Expr>,
    },
    Lambda {
        params: Vec<Param>,
        body: Box<Expr>,
    },
    Call {
        func: Box<Expr>,
        args: Vec<CallArg>,
    },
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Subscript {
        value: Box<Expr>,
        index: Box<Expr>,
    },
    Slice {
        lower: Option<Box<Expr>>,
        upper: Option<Box<Expr>>,
        step: Option<Box<Expr>>,
    },
    Comp {
        kind: CompKind,
        /// Element exprs: one for list/set/generator, two (key, value) for dict.
        elements: Vec<Expr>,
        generators: Vec<Comprehension>,
    },
    Yield {
        value: Option<Box<Expr>>,
        from: bool,
    },
    Await(Box<Expr>),
    Named {
        target: Box<Expr>,
        value: Box<Expr>,
    },
}

impl Expr {
    /// Walk this expression and all sub-expressions, pre-order.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a Expr)) {
        visit(self);
        match self {
            Expr::Name(_)
            | Expr::Int(_)
            | Expr::BigInt(_)
            | Expr::Float(_)
            | Expr::Str(_)
            | Expr::Bytes
            | Expr::Bool(_)
            | Expr::NoneLit
            | Expr::EllipsisLit => {}
            Expr::Tuple(items) | Expr::List(items) | Expr::Set(items) => {
                for item in items {
                    item.walk(visit);
                }
            }
            Expr::Dict { keys, values } => {
                for key in keys.iter().flatten() {
                    key.walk(visit);
                }
                for value in values {
                    value.walk(visit);
                }
            }
            Expr::Starred(inner) | Expr::Await(inner) => inner.walk(visit),
            Expr::Unary { operand, .. } => operand.walk(visit),
            Expr::Binary { left, right, .. } => {
                left.walk(visit);
                right.walk(visit);
            }
            Expr::BoolChain { values, .. } => {
                for value in values {
                    value.walk(visit);
                }
            }
            Expr::Compare {
                left, comparators, ..
            } => {
                left.walk(visit);
                for comp in comparators {
                    comp.walk(visit);
                }
            }
            Expr::IfExp { test, body, orelse } => {
                test.walk(visit);
                body.walk(visit);
                orelse.walk(visit);
            }
            Expr::Lambda { params, body } => {
                for param in params {
                    if let Some(default) = &param.default {
                        default.walk(visit);
                    }
                }
                body.walk(visit);
            }
            Expr::Call { func, args } => {
                func.walk(visit);
                for arg in args {
                    arg.expr().walk(visit);
                }
            }
            Expr::Attribute { value, .. } => value.walk(visit),
            Expr::Subscript { value, index } => {
                value.walk(visit);
                index.walk(visit);
            }
            Expr::Slice { lower, upper, step } => {
                for part in [lower, upper, step].into_iter().flatten() {
                    part.walk(visit);
                }
            }
            Expr::Comp {
                elements,
                generators,
                ..
            } => {
                for element in elements {
                    element.walk(visit);
                }
                for generator in generators {
                    generator.target.walk(visit);
                    generator.iter.walk(visit);
                    for cond in &generator.ifs {
                        cond.walk(visit);
                    }
                }
            }
            Expr::Yield { value, .. } => {
                if let Some(value) = value {
                    value.walk(visit);
                }
            }
            Expr::Named { target, value } => {
                target.walk(visit);
                value.walk(visit);
            }
        }
    }
}
