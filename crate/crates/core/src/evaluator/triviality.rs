//! Conservative triviality analysis.
//!
//! A program is trivial when the value it returns is hard-coded: derivable
//! by constant propagation over literal-only assignments, with no data flow
//! from the `symbols` parameter. The analysis prefers non-trivial whenever
//! it cannot prove constancy:
//!
//! - only straight-line code at the top level of the entry function is
//!   propagated; a return nested inside any compound statement is treated as
//!   input-dependent (hard-coded branches of a decision tree over the input
//!   are acceptable programs, not trivial ones),
//! - names assigned anywhere inside a compound statement are demoted to
//!   unknown after it,
//! - calls, attribute reads, and comprehensions are never constant, and a
//!   name that is the receiver of a method call or passed as a call argument
//!   is demoted (it may have been mutated).
//!
//! A function with no return statement at all returns a hard-coded null and
//! counts as trivial.

use std::collections::HashMap;

use crate::guest::ast::{Expr, Stmt, StmtKind};
use crate::guest::{self, Module};

/// Constness environment for straight-line propagation.
#[derive(Default)]
pub(crate) struct ConstEnv {
    known_const: HashMap<String, bool>,
}

impl ConstEnv {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    fn set(&mut self, name: &str, is_const: bool) {
        self.known_const.insert(name.to_string(), is_const);
    }

    fn demote(&mut self, name: &str) {
        self.known_const.insert(name.to_string(), false);
    }

    fn name_is_const(&self, name: &str) -> bool {
        self.known_const.get(name).copied().unwrap_or(false)
    }

    /// Whether an expression is a compile-time constant under this
    /// environment. Anything the analysis cannot follow is non-constant.
    pub(crate) fn is_const(&self, expr: &Expr) -> bool {
        match expr {
            Expr::Int(_)
            | Expr::BigInt(_)
            | Expr::Float(_)
            | Expr::Str(Some(_))
            | Expr::Bytes
            | Expr::Bool(_)
            | Expr::NoneLit
            | Expr::EllipsisLit => true,
            // f-strings interpolate runtime values.
            Expr::Str(None) => false,
            Expr::Name(name) => self.name_is_const(name),
            Expr::Tuple(items) | Expr::List(items) | Expr::Set(items) => {
                items.iter().all(|e| self.is_const(e))
            }
            Expr::Dict { keys, values } => {
                keys.iter().flatten().all(|k| self.is_const(k))
                    && values.iter().all(|v| self.is_const(v))
            }
            Expr::Starred(inner) => self.is_const(inner),
            Expr::Unary { operand, .. } => self.is_const(operand),
            Expr::Binary { left, right, .. } => self.is_const(left) && self.is_const(right),
            Expr::BoolChain { values, .. } => values.iter().all(|v| self.is_const(v)),
            Expr::Compare {
                left, comparators, ..
            } => self.is_const(left) && comparators.iter().all(|c| self.is_const(c)),
            Expr::IfExp { test, body, orelse } => {
                self.is_const(test) && self.is_const(body) && self.is_const(orelse)
            }
            Expr::Subscript { value, index } => self.is_const(value) && self.is_const(index),
            Expr::Slice { lower, upper, step } => [lower, upper, step]
                .into_iter()
                .flatten()
                .all(|part| self.is_const(part)),
            Expr::Call { .. }
            | Expr::Attribute { .. }
            | Expr::Lambda { .. }
            | Expr::Comp { .. }
            | Expr::Yield { .. }
            | Expr::Await(_)
            | Expr::Named { .. } => false,
        }
    }
}

/// Entry-function triviality over a parsed module. See the module docs for
/// the exact rule. Module-level literal assignments seed the environment —
/// an answer hard-coded through a module constant is still hard-coded —
/// and entry parameters shadow any module binding of the same name.
pub fn detect_trivial_in_module(module: &Module, entry_name: &str) -> bool {
    let Some(def) = guest::find_function(module, entry_name) else {
        return false;
    };

    let mut module_env = ConstEnv::new();
    for stmt in &module.body {
        apply_stmt(&stmt.kind, &mut module_env);
    }
    for param in &def.params {
        if let Some(name) = &param.name {
            module_env.demote(name);
        }
    }

    let mut top_level_returns = Vec::new();
    let mut has_nested_return = false;
    for stmt in &def.body {
        if let StmtKind::Return(value) = &stmt.kind {
            top_level_returns.push((stmt, value));
        } else if contains_return(&stmt.kind) {
            has_nested_return = true;
        }
    }
    if has_nested_return {
        return false;
    }
    if top_level_returns.is_empty() {
        // Implicit `return None`: the answer is hard-coded null.
        return true;
    }

    // Straight-line constant propagation over the body.
    let mut env = module_env;
    for stmt in &def.body {
        if let StmtKind::Return(value) = &stmt.kind {
            let is_const = match value {
                None => true,
                Some(expr) => env.is_const(expr),
            };
            if !is_const {
                return false;
            }
        } else {
            apply_stmt(&stmt.kind, &mut env);
        }
    }
    true
}

/// Does this statement (transitively, skipping nested defs) contain a
/// `return`?
fn contains_return(kind: &StmtKind) -> bool {
    let check_body = |body: &[Stmt]| {
        body.iter().any(|s| {
            matches!(s.kind, StmtKind::Return(_))
                || (!matches!(s.kind, StmtKind::FuncDef(_) | StmtKind::ClassDef { .. })
                    && contains_return(&s.kind))
        })
    };
    match kind {
        StmtKind::If { branches, orelse } => {
            branches.iter().any(|(_, b)| check_body(b)) || check_body(orelse)
        }
        StmtKind::While { body, orelse, .. } | StmtKind::For { body, orelse, .. } => {
            check_body(body) || check_body(orelse)
        }
        StmtKind::With { body, .. } => check_body(body),
        StmtKind::Try {
            body,
            handlers,
            orelse,
            finalbody,
        } => {
            check_body(body)
                || handlers.iter().any(|h| check_body(&h.body))
                || check_body(orelse)
                || check_body(finalbody)
        }
        _ => false,
    }
}

/// Update the environment for one statement: propagate constant
/// assignments, demote everything a compound statement might touch, and
/// demote names that expressions may mutate.
pub(crate) fn apply_stmt(kind: &StmtKind, env: &mut ConstEnv) {
    // Mutation through expressions happens regardless of statement shape.
    for expr in stmt_exprs(kind) {
        demote_mutated_names(expr, env);
    }
    match kind {
        StmtKind::Assign { targets, value } => {
            let is_const = env.is_const(value);
            for target in targets {
                assign_target(target, is_const, env);
            }
        }
        StmtKind::AnnAssign { target, value, .. } => {
            let is_const = value.as_ref().map(|v| env.is_const(v)).unwrap_or(false);
            assign_target(target, is_const, env);
        }
        StmtKind::AugAssign { target, value, .. } => match target {
            Expr::Name(name) => {
                let keeps_const = env.name_is_const(name) && env.is_const(value);
                env.set(name, keeps_const);
            }
            other => assign_target(other, false, env),
        },
        StmtKind::Del(targets) => {
            for target in targets {
                assign_target(target, false, env);
            }
        }
        StmtKind::Import(names) => {
            for name in names {
                let bound = name
                    .alias
                    .clone()
                    .unwrap_or_else(|| name.name.split('.').next().unwrap_or("").to_string());
                env.demote(&bound);
            }
        }
        StmtKind::ImportFrom { names, .. } => {
            for name in names {
                let bound = name.alias.as_deref().unwrap_or(&name.name);
                env.demote(bound);
            }
        }
        StmtKind::FuncDef(def) => env.demote(&def.name),
        StmtKind::ClassDef { name, .. } => env.demote(name),
        StmtKind::If { .. }
        | StmtKind::While { .. }
        | StmtKind::For { .. }
        | StmtKind::With { .. }
        | StmtKind::Try { .. } => {
            let mut assigned = Vec::new();
            collect_assigned_names(kind, &mut assigned);
            for name in assigned {
                env.demote(&name);
            }
        }
        _ => {}
    }
}

fn assign_target(target: &Expr, is_const: bool, env: &mut ConstEnv) {
    match target {
        Expr::Name(name) => env.set(name, is_const),
        Expr::Tuple(items) | Expr::List(items) => {
            // Unpacking: tracked conservatively as unknown.
            for item in items {
                assign_target(item, false, env);
            }
        }
        Expr::Starred(inner) => assign_target(inner, false, env),
        // Mutating a field or element invalidates the whole binding.
        Expr::Subscript { value, .. } | Expr::Attribute { value, .. } => {
            if let Some(base) = base_name(value) {
                env.demote(base);
            }
        }
        _ => {}
    }
}

fn base_name(expr: &Expr) -> Option<&str> {
    match expr {
        Expr::Name(name) => Some(name),
        Expr::Subscript { value, .. } | Expr::Attribute { value, .. } => base_name(value),
        Expr::Call { func, .. } => base_name(func),
        _ => None,
    }
}

/// Demote names an expression may mutate: walrus targets, method-call
/// receivers, and names passed as call arguments.
fn demote_mutated_names(expr: &Expr, env: &mut ConstEnv) {
    expr.walk(&mut |node| match node {
        Expr::Named { target, .. } => {
            if let Expr::Name(name) = target.as_ref() {
                env.demote(name);
            }
        }
        Expr::Call { func, args } => {
            if let Expr::Attribute { value, .. } = func.as_ref() {
                if let Some(base) = base_name(value) {
                    env.demote(base);
                }
            }
            for arg in args {
                if let Expr::Name(name) = arg.expr() {
                    env.demote(name);
                }
            }
        }
        _ => {}
    });
}

/// All names a statement may bind, recursively (loop targets, with/except
/// aliases, assignments, imports, nested defs — everything except nested
/// function/class interiors, whose bindings are scoped away).
fn collect_assigned_names(kind: &StmtKind, out: &mut Vec<String>) {
    let collect_target = |expr: &Expr, out: &mut Vec<String>| {
        collect_target_names(expr, out);
    };
    match kind {
        StmtKind::Assign { targets, .. } => {
            for t in targets {
                collect_target(t, out);
            }
        }
        StmtKind::AnnAssign { target, .. } | StmtKind::AugAssign { target, .. } => {
            collect_target(target, out);
        }
        StmtKind::Del(targets) => {
            for t in targets {
                collect_target(t, out);
            }
        }
        StmtKind::Import(names) => {
            for n in names {
                out.push(
                    n.alias
                        .clone()
                        .unwrap_or_else(|| n.name.split('.').next().unwrap_or("").to_string()),
                );
            }
        }
        StmtKind::ImportFrom { names, .. } => {
            for n in names {
                out.push(n.alias.clone().unwrap_or_else(|| n.name.clone()));
            }
        }
        StmtKind::FuncDef(def) => out.push(def.name.clone()),
        StmtKind::ClassDef { name, .. } => out.push(name.clone()),
        StmtKind::If { branches, orelse } => {
            for (_, body) in branches {
                for s in body {
                    collect_assigned_names(&s.kind, out);
                }
            }
            for s in orelse {
                collect_assigned_names(&s.kind, out);
            }
        }
        StmtKind::While { body, orelse, .. } => {
            for s in body.iter().chain(orelse) {
                collect_assigned_names(&s.kind, out);
            }
        }
        StmtKind::For {
            target,
            body,
            orelse,
            ..
        } => {
            collect_target(target, out);
            for s in body.iter().chain(orelse) {
                collect_assigned_names(&s.kind, out);
            }
        }
        StmtKind::With { items, body, .. } => {
            for (_, binding) in items {
                if let Some(b) = binding {
                    collect_target(b, out);
                }
            }
            for s in body {
                collect_assigned_names(&s.kind, out);
            }
        }
        StmtKind::Try {
            body,
            handlers,
            orelse,
            finalbody,
        } => {
            for s in body.iter().chain(orelse).chain(finalbody) {
                collect_assigned_names(&s.kind, out);
            }
            for h in handlers {
                if let Some(name) = &h.name {
                    out.push(name.clone());
                }
                for s in &h.body {
                    collect_assigned_names(&s.kind, out);
                }
            }
        }
        _ => {}
    }
    // Walrus targets anywhere in this statement's expressions.
    for expr in stmt_exprs(kind) {
        expr.walk(&mut |node| {
            if let Expr::Named { target, .. } = node {
                if let Expr::Name(name) = target.as_ref() {
                    out.push(name.clone());
                }
            }
        });
    }
}

fn collect_target_names(expr: &Expr, out: &mut Vec<String>) {
    match expr {
        Expr::Name(name) => out.push(name.clone()),
        Expr::Tuple(items) | Expr::List(items) => {
            for item in items {
                collect_target_names(item, out);
            }
        }
        Expr::Starred(inner) => collect_target_names(inner, out),
        Expr::Subscript { value, .. } | Expr::Attribute { value, .. } => {
            if let Some(base) = base_name(value) {
                out.push(base.to_string());
            }
        }
        _ => {}
    }
}

/// Immediate expressions of a statement (not descending into nested
/// statement bodies).
fn stmt_exprs(kind: &StmtKind) -> Vec<&Expr> {
    match kind {
        StmtKind::Expr(e) => vec![e],
        StmtKind::Assign { targets, value } => {
            let mut out: Vec<&Expr> = targets.iter().collect();
            out.push(value);
            out
        }
        StmtKind::AugAssign { target, value, .. } => vec![target, value],
        StmtKind::AnnAssign {
            target,
            annotation,
            value,
        } => {
            let mut out = vec![target, annotation];
            if let Some(v) = value {
                out.push(v);
            }
            out
        }
        StmtKind::Return(Some(e)) => vec![e],
        StmtKind::Del(targets) => targets.iter().collect(),
        StmtKind::Assert { test, msg } => {
            let mut out = vec![test];
            if let Some(m) = msg {
                out.push(m);
            }
            out
        }
        StmtKind::If { branches, .. } => branches.iter().map(|(c, _)| c).collect(),
        StmtKind::While { test, .. } => vec![test],
        StmtKind::For { iter, .. } => vec![iter],
        StmtKind::With { items, .. } => items.iter().map(|(ctx, _)| ctx).collect(),
        StmtKind::Raise { exc, cause } => exc.iter().chain(cause.iter()).collect(),
        _ => Vec::new(),
    }
}
