//! The LLM half of the evaluator: a judge model critiques the program and
//! the extracted symbols against the quality criteria embedded in the judge
//! template.
//!
//! The judge request carries the instance question (with any image
//! attachments) as one message and the rendered template — symbols, code,
//! and execution result substituted — as the next, keeping the template
//! bytes untouched. The response is split into symbol findings and program
//! findings by the section separation the template itself mandates;
//! free-form text that defies the separation lands wholly in the program
//! list.

use crate::error::Result;
use crate::instance::ReasoningInstance;
use crate::program::ProgramArtifact;
use crate::prompts;
use crate::provider::{Message, ModelRequest, ModelResponse, Part, Provider, Role};
use crate::sandbox::RunOutcome;
use crate::symbols::SymbolStore;

/// One parsed judge finding (the text of a bullet).
pub type JudgeFinding = String;

/// Render the judge prompt for the given materials. Exposed for golden-file
/// verification.
pub fn render_judge_prompt(
    symbols: &SymbolStore,
    program: &ProgramArtifact,
    run: &RunOutcome,
) -> String {
    prompts::render(
        prompts::JUDGE,
        &[
            ("json_str", symbols.canonical_json().as_str()),
            ("code_str", program.source.as_str()),
            ("output", render_return_value(run).as_str()),
            ("stdout", run.stdout.as_str()),
            ("err", run.exception_text.as_str()),
        ],
    )
}

/// Canonical rendering of a run's return value for prompt slots: canonical
/// JSON, or `None` when the run produced no value.
pub fn render_return_value(run: &RunOutcome) -> String {
    match &run.return_value {
        Some(value) => crate::symbols::canonical_json(value),
        None => "None".to_string(),
    }
}

/// Build the instance message, attachments included.
pub fn instance_message(instance: &ReasoningInstance) -> Result<Message> {
    let mut parts = vec![Part::Text(instance.query_text.clone())];
    for attachment in &instance.attachments {
        let bytes = std::fs::read(&attachment.path)?;
        parts.push(Part::Image {
            bytes,
            kind: attachment.kind,
        });
    }
    Ok(Message {
        role: Role::User,
        parts,
    })
}

/// Ask the judge model for a critique and split its findings.
pub fn run_judge(
    provider: &Provider,
    model_id: &str,
    instance: &ReasoningInstance,
    symbols: &SymbolStore,
    program: &ProgramArtifact,
    run: &RunOutcome,
) -> Result<(String, Vec<JudgeFinding>, Vec<JudgeFinding>, ModelResponse)> {
    let request = ModelRequest::new(
        model_id,
        vec![
            instance_message(instance)?,
            Message::user(render_judge_prompt(symbols, program, run)),
        ],
    );
    let response = provider.complete(&request)?;
    let (symbol_issues, program_issues) = split_findings(&response.text);
    Ok((
        response.text.clone(),
        symbol_issues,
        program_issues,
        response,
    ))
}

/// Split a judge response into (symbol findings, program findings).
///
/// Section headers containing "symbol" start the symbol list; any other
/// header returns to the program list. Bullet lines become findings; a
/// response that only says some variant of "no issues" yields empty lists.
pub fn split_findings(text: &str) -> (Vec<JudgeFinding>, Vec<JudgeFinding>) {
    let mut symbol_issues = Vec::new();
    let mut program_issues = Vec::new();
    let mut in_symbols = false;

    for raw_line in text.lines() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let header = header_text(line);
        if let Some(header) = header {
            let lowered = header.to_ascii_lowercase();
            in_symbols = lowered.contains("symbol");
            // Inline finding on the header line: "Symbol issues: missing x".
            if let Some((_, rest)) = header.split_once(':') {
                let rest = rest.trim();
                if !rest.is_empty() && !is_no_issue(rest) {
                    push_finding(rest, in_symbols, &mut symbol_issues, &mut program_issues);
                }
            }
            continue;
        }
        if let Some(body) = bullet_text(line) {
            if !is_no_issue(body) {
                push_finding(body, in_symbols, &mut symbol_issues, &mut program_issues);
            }
        }
    }
    (symbol_issues, program_issues)
}

fn push_finding(
    text: &str,
    in_symbols: bool,
    symbols: &mut Vec<String>,
    programs: &mut Vec<String>,
) {
    if in_symbols {
        symbols.push(text.to_string());
    } else {
        programs.push(text.to_string());
    }
}

/// A short line that names a section: markdown heading, bolded label, or a
/// "...issues..." line ending in a colon.
fn header_text(line: &str) -> Option<&str> {
    if let Some(rest) = line.strip_prefix('#') {
        return Some(rest.trim_start_matches('#').trim());
    }
    let stripped = line.trim_start_matches("**").trim_end_matches("**");
    let lowered = stripped.to_ascii_lowercase();
    let is_label = stripped.len() < 80
        && (lowered.contains("issue") || lowered.contains("finding"))
        && (lowered.contains("symbol") || lowered.contains("code") || lowered.contains("program"));
    if is_label && (stripped.ends_with(':') || line.starts_with("**") || stripped.contains(':')) {
        return Some(stripped.trim_end_matches(':'));
    }
    None
}

fn bullet_text(line: &str) -> Option<&str> {
    for marker in ["- ", "* ", "• "] {
        if let Some(rest) = line.strip_prefix(marker) {
            return Some(rest.trim());
        }
    }
    let mut chars = line.char_indices();
    let mut digits = 0;
    for (idx, c) in chars.by_ref() {
        if c.is_ascii_digit() {
            digits += 1;
            continue;
        }
        if digits > 0 && (c == '.' || c == ')') {
            return Some(line[idx + 1..].trim());
        }
        break;
    }
    None
}

fn is_no_issue(text: &str) -> bool {
    let lowered = text.to_ascii_lowercase();
    lowered.contains("no issues") || lowered.contains("no issue") || lowered == "none"
}
