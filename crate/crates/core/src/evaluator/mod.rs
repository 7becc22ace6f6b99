//! Structural evaluation of generated programs.
//!
//! Deterministic analyses over the guest AST flag the failure patterns that
//! make generated programs undesirable: syntax errors, hard-coded (trivial)
//! answers, placeholder stubs, example usage at top level, wrong return
//! shapes, and raw media processing. An LLM judge (in [`judge`]) supplies
//! the semantic critique; together they produce the feedback that drives
//! refinement.
//!
//! All checks here are pure functions of their inputs: same program, run,
//! and spec always produce the same [`IssueSet`], on any platform.

use serde::{Deserialize, Serialize};

use crate::answer::{normalize_answer, AnswerSpec};
use crate::guest::{self, ast, Diagnostic, Module, Tok};
use crate::program::ProgramArtifact;
use crate::sandbox::{RunOutcome, RunStatus};

mod judge;
mod triviality;

pub use judge::{
    instance_message, render_judge_prompt, render_return_value, run_judge, split_findings,
    JudgeFinding,
};
pub use triviality::detect_trivial_in_module;

/// Analyzer knobs. The media deny list holds import names whose presence
/// marks a program as processing raw media instead of extracted symbols.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzerConfig {
    pub media_deny_list: Vec<String>,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            media_deny_list: vec!["cv2".to_string(), "PIL".to_string()],
        }
    }
}

/// Deterministic verdicts for one program (+ run when available).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IssueSet {
    pub syntax_error: bool,
    pub trivial: bool,
    pub placeholder: bool,
    pub example_usage: bool,
    pub wrong_return_type: bool,
    pub returns_null: bool,
    pub raw_media_processing: bool,
    pub messages: Vec<String>,
}

impl IssueSet {
    pub fn any_flag(&self) -> bool {
        self.syntax_error
            || self.trivial
            || self.placeholder
            || self.example_usage
            || self.wrong_return_type
            || self.returns_null
            || self.raw_media_processing
    }

    /// Reporting category under the fixed precedence
    /// syntax > placeholder > wrong type > trivial, so each program counts
    /// once in category tallies while the flag set keeps everything.
    pub fn primary_category(&self) -> Option<IssueCategory> {
        if self.syntax_error {
            Some(IssueCategory::Syntax)
        } else if self.placeholder {
            Some(IssueCategory::Placeholder)
        } else if self.wrong_return_type || self.returns_null {
            Some(IssueCategory::WrongType)
        } else if self.trivial {
            Some(IssueCategory::Trivial)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCategory {
    Syntax,
    Placeholder,
    WrongType,
    Trivial,
}

impl IssueCategory {
    pub const ALL: [IssueCategory; 4] = [
        IssueCategory::Syntax,
        IssueCategory::Placeholder,
        IssueCategory::WrongType,
        IssueCategory::Trivial,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IssueCategory::Syntax => "syntax",
            IssueCategory::Placeholder => "placeholders",
            IssueCategory::WrongType => "type",
            IssueCategory::Trivial => "trivial",
        }
    }
}

/// Combined feedback for one iteration: deterministic flags, the run, and
/// the judge's split findings.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Feedback {
    pub issues: IssueSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunOutcome>,
    pub judge_summary: String,
    pub symbol_issues: Vec<String>,
    pub program_issues: Vec<String>,
}

/// Parse the program and report the first diagnostic. A source that parses
/// but never defines the entry function is also diagnosed here.
pub fn check_syntax(program: &ProgramArtifact) -> Option<Diagnostic> {
    let result = guest::parse(&program.source);
    if let Some(error) = result.error {
        return Some(error);
    }
    let module = result.module.expect("module present when no error");
    if guest::find_function(&module, &program.entry_name).is_none() {
        return Some(Diagnostic {
            line: 1,
            message: format!(
                "no entry definition: function '{}' not found",
                program.entry_name
            ),
        });
    }
    None
}

/// True when every return path of the entry function carries a value
/// derivable by constant propagation over literal-only assignments, with no
/// data flow from the input parameter. Inconclusive analysis returns false.
pub fn detect_trivial(program: &ProgramArtifact) -> bool {
    let result = guest::parse(&program.source);
    let Some(module) = result.module else {
        return false;
    };
    detect_trivial_in_module(&module, &program.entry_name)
}

/// Placeholder patterns: TODO/FIXME markers or "placeholder" in comments,
/// a bare ellipsis statement, raising a not-implemented error, or a
/// function whose body is a single no-op.
pub fn detect_placeholders(program: &ProgramArtifact) -> bool {
    !placeholder_messages(&program.source).is_empty()
}

fn placeholder_messages(source: &str) -> Vec<String> {
    let mut messages = Vec::new();
    let lexed = guest::lexer::lex(source);
    for comment in &lexed.comments {
        if comment.text.contains("TODO") || comment.text.contains("FIXME") {
            messages.push(format!(
                "line {}: TODO/FIXME marker in comment",
                comment.line
            ));
        } else if comment.text.to_ascii_lowercase().contains("placeholder") {
            messages.push(format!(
                "line {}: comment mentions a placeholder",
                comment.line
            ));
        }
    }

    let parsed = guest::parse(source);
    match parsed.module {
        Some(module) => scan_placeholder_stmts(&module.body, &mut messages),
        None => {
            // Tree unavailable; fall back to token-level evidence.
            for token in &lexed.tokens {
                match &token.tok {
                    Tok::Op("...") => {
                        messages.push(format!("line {}: ellipsis stub", token.line));
                    }
                    Tok::Name(name) if name.starts_with("NotImplemented") => {
                        messages.push(format!("line {}: not-implemented raise", token.line));
                    }
                    _ => {}
                }
            }
        }
    }
    messages
}

fn scan_placeholder_stmts(body: &[ast::Stmt], messages: &mut Vec<String>) {
    for stmt in body {
        match &stmt.kind {
            ast::StmtKind::Expr(ast::Expr::EllipsisLit) => {
                messages.push(format!("line {}: ellipsis stub statement", stmt.line));
            }
            ast::StmtKind::Raise { exc: Some(exc), .. } => {
                if raises_not_implemented(exc) {
                    messages.push(format!(
                        "line {}: raises a not-implemented error",
                        stmt.line
                    ));
                }
            }
            ast::StmtKind::FuncDef(def) => {
                if body_is_noop(&def.body) {
                    messages.push(format!(
                        "line {}: function '{}' body is a no-op",
                        def.line, def.name
                    ));
                }
                scan_placeholder_stmts(&def.body, messages);
            }
            _ => {}
        }
        for nested in nested_bodies(&stmt.kind) {
            scan_placeholder_stmts(nested, messages);
        }
    }
}

fn raises_not_implemented(exc: &ast::Expr) -> bool {
    let name = match exc {
        ast::Expr::Name(n) => Some(n.as_str()),
        ast::Expr::Call { func, .. } => match func.as_ref() {
            ast::Expr::Name(n) => Some(n.as_str()),
            _ => None,
        },
        _ => None,
    };
    name.is_some_and(|n| n.starts_with("NotImplemented"))
}

/// A body consisting only of `pass`, a docstring, or `...`.
fn body_is_noop(body: &[ast::Stmt]) -> bool {
    !body.is_empty()
        && body.iter().all(|stmt| {
            matches!(
                &stmt.kind,
                ast::StmtKind::Pass
                    | ast::StmtKind::Expr(ast::Expr::Str(_))
                    | ast::StmtKind::Expr(ast::Expr::EllipsisLit)
            )
        })
}

fn nested_bodies(kind: &ast::StmtKind) -> Vec<&[ast::Stmt]> {
    match kind {
        ast::StmtKind::If { branches, orelse } => {
            let mut out: Vec<&[ast::Stmt]> = branches.iter().map(|(_, b)| b.as_slice()).collect();
            out.push(orelse.as_slice());
            out
        }
        ast::StmtKind::While { body, orelse, .. } | ast::StmtKind::For { body, orelse, .. } => {
            vec![body.as_slice(), orelse.as_slice()]
        }
        ast::StmtKind::With { body, .. } => vec![body.as_slice()],
        ast::StmtKind::Try {
            body,
            handlers,
            orelse,
            finalbody,
        } => {
            let mut out = vec![body.as_slice(), orelse.as_slice(), finalbody.as_slice()];
            out.extend(handlers.iter().map(|h| h.body.as_slice()));
            out
        }
        ast::StmtKind::ClassDef { body, .. } => vec![body.as_slice()],
        _ => Vec::new(),
    }
}

/// True when any top-level statement is something other than an import, a
/// definition, a constant assignment, or a docstring — which covers
/// top-level invocations of the entry function and main-guard blocks.
pub fn detect_example_usage(program: &ProgramArtifact) -> bool {
    let result = guest::parse(&program.source);
    let Some(module) = result.module else {
        return false;
    };
    !example_usage_messages(&module).is_empty()
}

fn example_usage_messages(module: &Module) -> Vec<String> {
    let mut messages = Vec::new();
    let mut env = triviality::ConstEnv::new();
    for stmt in &module.body {
        match &stmt.kind {
            ast::StmtKind::Import(_)
            | ast::StmtKind::ImportFrom { .. }
            | ast::StmtKind::FuncDef(_)
            | ast::StmtKind::ClassDef { .. } => {
                triviality::apply_stmt(&stmt.kind, &mut env);
            }
            ast::StmtKind::Expr(ast::Expr::Str(_))
            | ast::StmtKind::Expr(ast::Expr::EllipsisLit) => {}
            ast::StmtKind::Assign { targets, value }
                if targets.iter().all(|t| matches!(t, ast::Expr::Name(_)))
                    && env.is_const(value) =>
            {
                triviality::apply_stmt(&stmt.kind, &mut env);
            }
            ast::StmtKind::AnnAssign {
                target,
                value: Some(value),
                ..
            } if matches!(target, ast::Expr::Name(_)) && env.is_const(value) => {
                triviality::apply_stmt(&stmt.kind, &mut env);
            }
            other => {
                messages.push(format!(
                    "line {}: top-level {} is example usage",
                    stmt.line,
                    stmt_label(other)
                ));
                triviality::apply_stmt(other, &mut env);
            }
        }
    }
    messages
}

fn stmt_label(kind: &ast::StmtKind) -> &'static str {
    match kind {
        ast::StmtKind::Expr(ast::Expr::Call { .. }) => "call",
        ast::StmtKind::Expr(_) => "expression",
        ast::StmtKind::If { .. } => "conditional block",
        ast::StmtKind::For { .. } | ast::StmtKind::While { .. } => "loop",
        ast::StmtKind::Assign { .. } | ast::StmtKind::AnnAssign { .. } => "computed assignment",
        ast::StmtKind::AugAssign { .. } => "augmented assignment",
        _ => "statement",
    }
}

/// Return-shape conformance for a successful run: `returns_null` when the
/// value is null and the spec does not admit a null answer;
/// `wrong_return_type` when the value is a non-scalar tree or fails to
/// normalize under the spec.
pub fn check_return(run: &RunOutcome, spec: &AnswerSpec) -> (bool, bool) {
    if run.status != RunStatus::Ok {
        return (false, false);
    }
    match &run.return_value {
        Some(serde_json::Value::Null) | None => (false, !spec.admits_null()),
        Some(value @ (serde_json::Value::Array(_) | serde_json::Value::Object(_))) => {
            let _ = value;
            (true, false)
        }
        Some(scalar) => (normalize_answer(scalar, spec).is_err(), false),
    }
}

/// True when the program imports any module on the media deny list.
pub fn detect_raw_media(program: &ProgramArtifact, config: &AnalyzerConfig) -> bool {
    !raw_media_messages(&program.source, config).is_empty()
}

fn raw_media_messages(source: &str, config: &AnalyzerConfig) -> Vec<String> {
    if config.media_deny_list.is_empty() {
        return Vec::new();
    }
    let mut messages = Vec::new();
    let parsed = guest::parse(source);
    match parsed.module {
        Some(module) => {
            let mut imports = Vec::new();
            collect_imports(&module.body, &mut imports);
            for (line, base) in imports {
                if config.media_deny_list.iter().any(|m| *m == base) {
                    messages.push(format!(
                        "line {line}: imports media-processing module '{base}'"
                    ));
                }
            }
        }
        None => {
            // Token fallback: names right after import/from keywords.
            let lexed = guest::lexer::lex(source);
            let tokens = &lexed.tokens;
            for window in tokens.windows(2) {
                let is_import_kw = matches!(
                    window[0].tok,
                    Tok::Kw(guest::Kw::Import) | Tok::Kw(guest::Kw::From)
                );
                if let (true, Tok::Name(name)) = (is_import_kw, &window[1].tok) {
                    if config.media_deny_list.iter().any(|m| m == name) {
                        messages.push(format!(
                            "line {}: imports media-processing module '{name}'",
                            window[1].line
                        ));
                    }
                }
            }
        }
    }
    messages
}

fn collect_imports(body: &[ast::Stmt], out: &mut Vec<(usize, String)>) {
    for stmt in body {
        match &stmt.kind {
            ast::StmtKind::Import(names) => {
                for name in names {
                    let base = name.name.split('.').next().unwrap_or("").to_string();
                    out.push((stmt.line, base));
                }
            }
            ast::StmtKind::ImportFrom { module, level, .. } if *level == 0 => {
                let base = module.split('.').next().unwrap_or("").to_string();
                if !base.is_empty() {
                    out.push((stmt.line, base));
                }
            }
            ast::StmtKind::FuncDef(def) => collect_imports(&def.body, out),
            other => {
                for nested in nested_bodies(other) {
                    collect_imports(nested, out);
                }
            }
        }
    }
}

/// Compose the deterministic checks plus exception/timeout surfacing.
///
/// On syntax errors, tree analysis is unavailable: trivial and example-usage
/// stay false and placeholders come from token-level scans only.
pub fn analyze(
    program: &ProgramArtifact,
    run: &RunOutcome,
    spec: &AnswerSpec,
    config: &AnalyzerConfig,
) -> IssueSet {
    let mut issues = analyze_static(program, config);

    let (wrong_type, returns_null) = check_return(run, spec);
    if wrong_type {
        issues.wrong_return_type = true;
        issues.messages.push(format!(
            "wrong return type: value {} does not normalize as a {} answer",
            run.return_value
                .as_ref()
                .map(|v| v.to_string())
                .unwrap_or_else(|| "null".to_string()),
            spec.kind.as_str()
        ));
    }
    if returns_null {
        issues.returns_null = true;
        issues
            .messages
            .push("returns null: the answer spec does not admit a null answer".to_string());
    }

    match run.status {
        RunStatus::Ok => {}
        RunStatus::Exception => issues
            .messages
            .push(format!("execution raised: {}", run.exception_text)),
        RunStatus::Timeout => issues
            .messages
            .push(format!("execution timed out: {}", run.exception_text)),
        RunStatus::ResourceExhausted => issues
            .messages
            .push(format!("resource limit hit: {}", run.exception_text)),
        RunStatus::HarnessError => issues
            .messages
            .push(format!("harness error: {}", run.exception_text)),
    }

    issues
}

/// Static-only analysis for sources that have not been executed: the five
/// program checks without run-dependent flags.
pub fn analyze_static(program: &ProgramArtifact, config: &AnalyzerConfig) -> IssueSet {
    let mut issues = IssueSet::default();
    if let Some(diag) = check_syntax(program) {
        issues.syntax_error = true;
        issues.messages.push(format!("syntax: {diag}"));
    }
    let placeholder_msgs = placeholder_messages(&program.source);
    if !placeholder_msgs.is_empty() {
        issues.placeholder = true;
        issues
            .messages
            .extend(placeholder_msgs.iter().map(|m| format!("placeholder: {m}")));
    }
    let media_msgs = raw_media_messages(&program.source, config);
    if !media_msgs.is_empty() {
        issues.raw_media_processing = true;
        issues
            .messages
            .extend(media_msgs.iter().map(|m| format!("raw media: {m}")));
    }
    if !issues.syntax_error {
        if let Some(module) = guest::parse(&program.source).module {
            if triviality::detect_trivial_in_module(&module, &program.entry_name) {
                issues.trivial = true;
                issues.messages.push(
                    "trivial: every return of the entry function is a hard-coded constant"
                        .to_string(),
                );
            }
            let usage_msgs = example_usage_messages(&module);
            if !usage_msgs.is_empty() {
                issues.example_usage = true;
                issues
                    .messages
                    .extend(usage_msgs.iter().map(|m| format!("example usage: {m}")));
            }
        }
    }
    issues
}

/// Well-formedness: the run succeeded, returned a scalar, and none of
/// syntax/placeholder/wrong-type/returns-null fired. The non-trivial tally
/// additionally requires `trivial = false`.
pub fn is_well_formed(issues: &IssueSet, run: &RunOutcome) -> bool {
    run.status == RunStatus::Ok
        && run.returns_scalar()
        && !issues.syntax_error
        && !issues.placeholder
        && !issues.wrong_return_type
        && !issues.returns_null
}

pub fn is_non_trivial(issues: &IssueSet, run: &RunOutcome) -> bool {
    is_well_formed(issues, run) && !issues.trivial
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prog(source: &str) -> ProgramArtifact {
        ProgramArtifact::new(source, 0)
    }

    fn ok_run(value: serde_json::Value) -> RunOutcome {
        RunOutcome {
            status: RunStatus::Ok,
            return_value: Some(value),
            stdout: String::new(),
            exception_text: String::new(),
            duration_seconds: 0.01,
        }
    }

    const COUNT_OBJECTS_PROGRAM: &str = concat!(
        "def solve(symbols):\n",
        "  \"\"\"\n",
        "  Counts large objects between two reference objects.\n",
        "  \"\"\"\n",
        "\n",
        "  cyan_x = next((obj[\"x\"] for obj in symbols[\"objects\"] if obj[\"color\"] == \"cyan\"), None)\n",
        "  brown_x = next((obj[\"x\"] for obj in symbols[\"objects\"] if obj[\"color\"] == \"brown\"), None)\n",
        "\n",
        "  count = 0\n",
        "  for obj in symbols[\"objects\"]:\n",
        "    if obj[\"size\"] == \"large\":\n",
        "      if obj[\"x\"] < cyan_x and obj[\"x\"] > brown_x:\n",
        "        count += 1\n",
        "\n",
        "  return count\n",
    );

    #[test]
    fn syntax_unbalanced_paren() {
        let diag = check_syntax(&prog("def solve(symbols): return (1\n")).expect("diagnostic");
        assert_eq!(diag.line, 1);
    }

    #[test]
    fn syntax_clean_program() {
        assert!(check_syntax(&prog(COUNT_OBJECTS_PROGRAM)).is_none());
    }

    #[test]
    fn syntax_empty_source_missing_entry() {
        let diag = check_syntax(&prog("")).expect("diagnostic");
        assert!(diag.message.contains("no entry definition"));
    }

    #[test]
    fn trivial_constant_return() {
        assert!(detect_trivial(&prog("def solve(symbols): return 1\n")));
    }

    #[test]
    fn trivial_symbol_reader_is_not_trivial() {
        assert!(!detect_trivial(&prog(COUNT_OBJECTS_PROGRAM)));
    }

    #[test]
    fn trivial_zero_initialized_arithmetic() {
        let source = "def solve(symbols):\n    a = 0\n    b = 0\n    # several steps of reasoning done here in comments\n    return a + b\n";
        assert!(detect_trivial(&prog(source)));
    }

    #[test]
    fn trivial_flips_with_symbol_path() {
        let base = "def solve(symbols):\n    return 3\n";
        assert!(detect_trivial(&prog(base)));
        let extended = "def solve(symbols):\n    if symbols[\"x\"]:\n        return symbols[\"y\"]\n    return 3\n";
        assert!(!detect_trivial(&prog(extended)));
    }

    #[test]
    fn placeholder_patterns() {
        assert!(detect_placeholders(&prog("def solve(symbols):\n    ...\n")));
        assert!(detect_placeholders(&prog(
            "# TODO: handle edge case\ndef solve(symbols):\n    return 1\n"
        )));
        assert!(detect_placeholders(&prog(
            "def solve(symbols):\n    raise NotImplementedError\n"
        )));
        assert!(detect_placeholders(&prog(
            "def solve(symbols):\n    pass\n"
        )));
        assert!(detect_placeholders(&prog(
            "x = 1  # placeholder value\ndef solve(symbols):\n    return x\n"
        )));
        assert!(!detect_placeholders(&prog(COUNT_OBJECTS_PROGRAM)));
    }

    #[test]
    fn example_usage_detection() {
        assert!(detect_example_usage(&prog(
            "def solve(symbols):\n    return 1\n\nprint(solve({}))\n"
        )));
        assert!(detect_example_usage(&prog(
            "def solve(symbols):\n    return 1\n\nif __name__ == \"__main__\":\n    solve({})\n"
        )));
        assert!(!detect_example_usage(&prog(
            "import math\n\nCONST = {\"a\": 1}\n\ndef solve(symbols):\n    return CONST[\"a\"]\n"
        )));
        // Constant top-level symbol tables are fine.
        assert!(!detect_example_usage(&prog("symbols = {'objects': [1, 2]}\n\ndef solve(symbols):\n    return len(symbols['objects'])\n")));
    }

    #[test]
    fn check_return_shapes() {
        let spec = AnswerSpec::integer();
        assert_eq!(
            check_return(&ok_run(serde_json::json!(3)), &spec),
            (false, false)
        );
        assert_eq!(
            check_return(&ok_run(serde_json::json!({"answer": 3})), &spec),
            (true, false)
        );
        assert_eq!(
            check_return(&ok_run(serde_json::Value::Null), &spec),
            (false, true)
        );
        // Free text admits null (it normalizes to the text "none").
        assert_eq!(
            check_return(&ok_run(serde_json::Value::Null), &AnswerSpec::free_text()),
            (false, false)
        );
        assert_eq!(
            check_return(
                &ok_run(serde_json::json!("brown")),
                &AnswerSpec::free_text()
            ),
            (false, false)
        );
        // Unparseable scalar under a numeric kind is a type problem.
        assert_eq!(
            check_return(&ok_run(serde_json::json!("no idea")), &spec),
            (true, false)
        );
    }

    #[test]
    fn raw_media_deny_list() {
        let config = AnalyzerConfig::default();
        assert!(detect_raw_media(
            &prog("import cv2\n\ndef solve(symbols):\n    return 1\n"),
            &config
        ));
        assert!(detect_raw_media(
            &prog("from PIL import Image\n\ndef solve(symbols):\n    return 1\n"),
            &config
        ));
        assert!(!detect_raw_media(&prog(COUNT_OBJECTS_PROGRAM), &config));
        let empty = AnalyzerConfig {
            media_deny_list: Vec::new(),
        };
        assert!(!detect_raw_media(&prog("import cv2\n"), &empty));
    }

    #[test]
    fn analyze_composes() {
        let config = AnalyzerConfig::default();
        let spec = AnswerSpec::integer();

        let issues = analyze(
            &prog("def solve(symbols): return (1\n"),
            &RunOutcome::harness_error("parse"),
            &spec,
            &config,
        );
        assert!(issues.syntax_error);
        assert!(!issues.trivial);
        assert_eq!(issues.primary_category(), Some(IssueCategory::Syntax));

        let issues = analyze(
            &prog(COUNT_OBJECTS_PROGRAM),
            &ok_run(serde_json::json!(1)),
            &spec,
            &config,
        );
        assert!(!issues.any_flag(), "unexpected flags: {issues:?}");

        let issues = analyze(
            &prog("def solve(symbols):\n    return 7\n"),
            &ok_run(serde_json::json!(7)),
            &spec,
            &config,
        );
        assert!(issues.trivial);
        assert_eq!(issues.primary_category(), Some(IssueCategory::Trivial));
    }

    #[test]
    fn messages_accompany_flags() {
        let config = AnalyzerConfig::default();
        let spec = AnswerSpec::integer();
        let issues = analyze(
            &prog("# TODO: finish\nimport cv2\n\ndef solve(symbols):\n    return None\n"),
            &ok_run(serde_json::Value::Null),
            &spec,
            &config,
        );
        assert!(issues.placeholder && issues.raw_media_processing && issues.returns_null);
        assert!(issues
            .messages
            .iter()
            .any(|m| m.starts_with("placeholder:")));
        assert!(issues.messages.iter().any(|m| m.starts_with("raw media:")));
        assert!(issues
            .messages
            .iter()
            .any(|m| m.starts_with("returns null:")));
    }

    #[test]
    fn well_formedness() {
        let run = ok_run(serde_json::json!("brown"));
        let issues = IssueSet::default();
        assert!(is_well_formed(&issues, &run));
        assert!(is_non_trivial(&issues, &run));

        let trivial_issues = IssueSet {
            trivial: true,
            ..Default::default()
        };
        assert!(is_well_formed(&trivial_issues, &run));
        assert!(!is_non_trivial(&trivial_issues, &run));

        let timeout_run = RunOutcome {
            status: RunStatus::Timeout,
            return_value: None,
            stdout: String::new(),
            exception_text: "limit".into(),
            duration_seconds: 2.0,
        };
        assert!(!is_well_formed(&issues, &timeout_run));
    }
}
