//! Guest-language front end: lexer, AST, and parser for the scripting
//! language that generated programs are written in.
//!
//! Analyses operate on this module's AST. Execution happens elsewhere (the
//! sandbox drives a real interpreter); this front end exists so structural
//! checks stay deterministic, in-process, and identical across platforms.

pub mod ast;
pub mod lexer;
pub mod parser;

pub use ast::{Expr, FuncDef, Module, Stmt, StmtKind};
pub use lexer::{Comment, Diagnostic, Kw, LexedSource, Tok, Token};
pub use parser::{parse, ParseResult};

/// Find the top-level function definition with the given name.
pub fn find_function<'a>(module: &'a Module, name: &str) -> Option<&'a FuncDef> {
    module.body.iter().find_map(|stmt| match &stmt.kind {
        StmtKind::FuncDef(def) if def.name == name => Some(def),
        _ => None,
    })
}
