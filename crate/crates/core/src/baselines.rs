//! Reference solvers: chain-of-thought, one-shot program generation (PoT),
//! and the retrying variant that regenerates until execution succeeds.
//!
//! These share the provider, sandbox, and evaluator with the synthesis
//! loop, so analyzer flags in benchmark tallies are computed by the
//! identical code path. The prompts live under `assets/prompts/local/` and
//! are project-defined (not protocol templates).

use std::time::Instant;

use crate::answer::{normalize_answer, normalize_answer_text};
use crate::error::Result;
use crate::evaluator::{self, AnalyzerConfig, Feedback};
use crate::fenced;
use crate::instance::ReasoningInstance;
use crate::program::ProgramArtifact;
use crate::prompts;
use crate::provider::{estimate_cost, Message, ModelRequest, PriceSheet, Provider, TokenUsage};
use crate::sandbox::{ExecLimits, RunStatus, Sandbox};
use crate::symbols::SymbolStore;
use crate::trace::{IterationTrace, SolveMethod, SolveResult, TraceAction};

#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub model_id: String,
    pub pot_max_retries: u32,
    pub limits: ExecLimits,
    pub analyzer: AnalyzerConfig,
    pub prices: PriceSheet,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            model_id: "default-model".to_string(),
            pot_max_retries: 3,
            limits: ExecLimits::default(),
            analyzer: AnalyzerConfig::default(),
            prices: PriceSheet::default(),
        }
    }
}

/// First non-empty line after the last FINAL ANSWER marker.
pub fn extract_final_answer(text: &str) -> Option<String> {
    let tail = fenced::after_last_marker(text, "FINAL ANSWER")?;
    let tail = tail.trim_start_matches([':', '*']).trim();
    tail.lines()
        .map(str::trim)
        .find(|line| !line.is_empty())
        .map(str::to_string)
}

/// Chain-of-thought baseline: one completion, answer extracted after the
/// FINAL ANSWER marker. A response without the marker is re-prompted once,
/// then the response tail is used with a warning. Never touches the sandbox.
pub fn cot_solve(
    provider: &Provider,
    instance: &ReasoningInstance,
    cfg: &BaselineConfig,
) -> Result<SolveResult> {
    let started = Instant::now();
    let rendered = prompts::render(prompts::COT, &[("question", instance.query_text.as_str())]);
    let mut first = evaluator::instance_message(instance)?;
    first.parts[0] = crate::provider::Part::Text(rendered);
    let mut transcript = vec![first];
    let mut usage = TokenUsage::default();
    let mut warnings = Vec::new();

    let mut answer_text: Option<String> = None;
    for attempt in 0..2 {
        let response = provider.complete(&ModelRequest::new(&cfg.model_id, transcript.clone()))?;
        usage.add(response.usage);
        if let Some(found) = extract_final_answer(&response.text) {
            answer_text = Some(found);
            break;
        }
        if attempt == 0 {
            warnings.push("response missing FINAL ANSWER marker; re-prompted".to_string());
            transcript.push(Message::assistant(response.text));
            transcript.push(Message::user(prompts::REPROMPT_FINAL_ANSWER.to_string()));
        } else {
            // Fall back to the tail of the response.
            let tail = response
                .text
                .lines()
                .rev()
                .map(str::trim)
                .find(|line| !line.is_empty())
                .unwrap_or("")
                .to_string();
            warnings.push("no FINAL ANSWER after re-prompt; using response tail".to_string());
            answer_text = Some(tail);
        }
    }

    let final_answer = answer_text
        .as_deref()
        .and_then(|text| normalize_answer_text(text, &instance.answer_spec).ok());
    Ok(SolveResult {
        method: SolveMethod::Cot,
        final_answer,
        trace: Vec::new(),
        usage,
        cost_usd: estimate_cost(usage, &cfg.prices),
        well_formed: false,
        non_trivial: false,
        wall_seconds: started.elapsed().as_secs_f64(),
        warnings,
    })
}

/// One PoT attempt: request an input-free program, execute its last code
/// block, analyze it with the shared evaluator.
fn pot_attempt(
    provider: &Provider,
    sandbox: &Sandbox,
    instance: &ReasoningInstance,
    cfg: &BaselineConfig,
    transcript: &mut Vec<Message>,
    usage: &mut TokenUsage,
    warnings: &mut Vec<String>,
    index: u32,
) -> Result<Option<IterationTrace>> {
    let response = provider.complete(&ModelRequest::new(&cfg.model_id, transcript.clone()))?;
    usage.add(response.usage);
    transcript.push(Message::assistant(response.text.clone()));

    let blocks = fenced::parse_fenced_blocks(&response.text);
    let code = blocks
        .iter()
        .rev()
        .find(|b| !b.tag.eq_ignore_ascii_case("json") && !b.body.trim().is_empty());
    let Some(code) = code else {
        warnings.push(format!(
            "attempt {}: response contained no code block",
            index + 1
        ));
        return Ok(None);
    };

    let program = ProgramArtifact::new(code.body.clone(), index);
    let symbols = SymbolStore::default(); // input-free: no symbols bound
    let run = sandbox.execute(&program, &symbols, &cfg.limits);
    let issues = evaluator::analyze(&program, &run, &instance.answer_spec, &cfg.analyzer);
    Ok(Some(IterationTrace {
        index,
        symbols,
        program,
        run: run.clone(),
        feedback: Feedback {
            issues,
            run: Some(run),
            ..Default::default()
        },
        action: TraceAction::Initial,
        usage: TokenUsage::default(),
    }))
}

fn pot_result(
    method: SolveMethod,
    instance: &ReasoningInstance,
    cfg: &BaselineConfig,
    trace: Vec<IterationTrace>,
    usage: TokenUsage,
    warnings: Vec<String>,
    started: Instant,
) -> SolveResult {
    let (final_answer, well_formed, non_trivial) = match trace.last() {
        Some(last) if last.run.status == RunStatus::Ok => (
            last.run
                .return_value
                .as_ref()
                .and_then(|v| normalize_answer(v, &instance.answer_spec).ok()),
            evaluator::is_well_formed(&last.feedback.issues, &last.run),
            evaluator::is_non_trivial(&last.feedback.issues, &last.run),
        ),
        _ => (None, false, false),
    };
    SolveResult {
        method,
        final_answer,
        trace,
        usage,
        cost_usd: estimate_cost(usage, &cfg.prices),
        well_formed,
        non_trivial,
        wall_seconds: started.elapsed().as_secs_f64(),
        warnings,
    }
}

/// Program-of-thought baseline: one generation, one execution.
pub fn pot_solve(
    provider: &Provider,
    sandbox: &Sandbox,
    instance: &ReasoningInstance,
    cfg: &BaselineConfig,
) -> Result<SolveResult> {
    let started = Instant::now();
    let rendered = prompts::render(prompts::POT, &[("question", instance.query_text.as_str())]);
    let mut first = evaluator::instance_message(instance)?;
    first.parts[0] = crate::provider::Part::Text(rendered);
    let mut transcript = vec![first];
    let mut usage = TokenUsage::default();
    let mut warnings = Vec::new();

    let trace = match pot_attempt(
        provider,
        sandbox,
        instance,
        cfg,
        &mut transcript,
        &mut usage,
        &mut warnings,
        0,
    )? {
        Some(trace) => vec![trace],
        None => Vec::new(),
    };
    Ok(pot_result(
        SolveMethod::Pot,
        instance,
        cfg,
        trace,
        usage,
        warnings,
        started,
    ))
}

/// PoT with retries: regenerate until the program executes without error
/// or the attempt budget is spent. Every attempt lands in the trace.
pub fn pot_retries_solve(
    provider: &Provider,
    sandbox: &Sandbox,
    instance: &ReasoningInstance,
    cfg: &BaselineConfig,
) -> Result<SolveResult> {
    let started = Instant::now();
    let rendered = prompts::render(prompts::POT, &[("question", instance.query_text.as_str())]);
    let mut first = evaluator::instance_message(instance)?;
    first.parts[0] = crate::provider::Part::Text(rendered);
    let mut transcript = vec![first];
    let mut usage = TokenUsage::default();
    let mut warnings = Vec::new();
    let mut trace: Vec<IterationTrace> = Vec::new();

    let budget = cfg.pot_max_retries.max(1);
    for attempt in 0..budget {
        let produced = pot_attempt(
            provider,
            sandbox,
            instance,
            cfg,
            &mut transcript,
            &mut usage,
            &mut warnings,
            attempt,
        )?;
        let failure_context = match produced {
            Some(iteration) => {
                let ok = iteration.run.status == RunStatus::Ok;
                let err_text = iteration.run.exception_text.clone();
                trace.push(iteration);
                if ok {
                    break;
                }
                err_text
            }
            None => "the response contained no code block".to_string(),
        };
        if attempt + 1 < budget {
            transcript.push(Message::user(prompts::render(
                prompts::POT_RETRY,
                &[("err", failure_context.as_str())],
            )));
        }
    }
    Ok(pot_result(
        SolveMethod::PotRetries,
        instance,
        cfg,
        trace,
        usage,
        warnings,
        started,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::answer::AnswerSpec;
    use crate::provider::mock::ScriptedTransport;
    use std::sync::Arc;

    fn instance() -> ReasoningInstance {
        ReasoningInstance::text_only("b1", "toy", "What is 3 + 4?", AnswerSpec::integer())
    }

    fn sandbox() -> Option<Sandbox> {
        let sb = Sandbox::default();
        sb.is_available().then_some(sb)
    }

    #[test]
    fn cot_extracts_final_answer() {
        let transport = Arc::new(ScriptedTransport::texts(&[
            "3 + 4: first add 3, then 4.\nFINAL ANSWER: 42",
        ]));
        let provider = Provider::new(transport.clone());
        let result = cot_solve(&provider, &instance(), &BaselineConfig::default()).unwrap();
        assert_eq!(result.answer_text(), Some("42"));
        assert!(result.trace.is_empty());
        assert_eq!(result.method, SolveMethod::Cot);
        assert_eq!(transport.calls(), 1);
    }

    #[test]
    fn cot_last_marker_wins() {
        let transport = Arc::new(ScriptedTransport::texts(&[
            "FINAL ANSWER: 1\nwait, recalculating\nFINAL ANSWER: 7",
        ]));
        let provider = Provider::new(transport);
        let result = cot_solve(&provider, &instance(), &BaselineConfig::default()).unwrap();
        assert_eq!(result.answer_text(), Some("7"));
    }

    #[test]
    fn cot_reprompts_then_uses_retry_answer() {
        let transport = Arc::new(ScriptedTransport::texts(&[
            "I believe the answer is seven.",
            "FINAL ANSWER: 7",
        ]));
        let provider = Provider::new(transport.clone());
        let result = cot_solve(&provider, &instance(), &BaselineConfig::default()).unwrap();
        assert_eq!(result.answer_text(), Some("7"));
        assert_eq!(result.warnings.len(), 1);
        assert_eq!(transport.calls(), 2);
    }

    #[test]
    fn cot_tail_fallback() {
        let transport = Arc::new(ScriptedTransport::texts(&["no marker", "the answer: 9"]));
        let provider = Provider::new(transport);
        let result = cot_solve(&provider, &instance(), &BaselineConfig::default()).unwrap();
        assert_eq!(result.answer_text(), Some("9"));
        assert_eq!(result.warnings.len(), 2);
    }

    #[test]
    fn pot_executes_program() {
        let Some(sandbox) = sandbox() else { return };
        let transport = Arc::new(ScriptedTransport::texts(&[
            "Here is a program.\n```python\ndef solve():\n    total = 0\n    for v in [3, 4]:\n        total += v\n    return total\n```",
        ]));
        let provider = Provider::new(transport);
        let result =
            pot_solve(&provider, &sandbox, &instance(), &BaselineConfig::default()).unwrap();
        assert_eq!(result.answer_text(), Some("7"));
        assert!(result.well_formed);
        assert!(result.non_trivial);
        assert_eq!(result.trace.len(), 1);
    }

    #[test]
    fn pot_trivial_program_flagged() {
        let Some(sandbox) = sandbox() else { return };
        let transport = Arc::new(ScriptedTransport::texts(&[
            "```python\ndef solve():\n    return 7\n```",
        ]));
        let provider = Provider::new(transport);
        let result =
            pot_solve(&provider, &sandbox, &instance(), &BaselineConfig::default()).unwrap();
        assert_eq!(result.answer_text(), Some("7"));
        assert!(result.well_formed);
        assert!(!result.non_trivial);
        assert!(result.trace[0].feedback.issues.trivial);
    }

    #[test]
    fn pot_prose_only_has_no_answer() {
        let Some(sandbox) = sandbox() else { return };
        let transport = Arc::new(ScriptedTransport::texts(&[
            "the answer is 7, no code needed",
        ]));
        let provider = Provider::new(transport);
        let result =
            pot_solve(&provider, &sandbox, &instance(), &BaselineConfig::default()).unwrap();
        assert!(result.final_answer.is_none());
        assert!(result.trace.is_empty());
        assert!(!result.warnings.is_empty());
    }

    #[test]
    fn pot_retries_until_success() {
        let Some(sandbox) = sandbox() else { return };
        let transport = Arc::new(ScriptedTransport::texts(&[
            "```python\ndef solve():\n    return undefined_name\n```",
            "```python\ndef solve():\n    total = 3 + len([1, 2, 3, 4])\n    return total\n```",
        ]));
        let provider = Provider::new(transport.clone());
        let result =
            pot_retries_solve(&provider, &sandbox, &instance(), &BaselineConfig::default())
                .unwrap();
        assert_eq!(result.trace.len(), 2);
        assert_eq!(result.trace[0].run.status, RunStatus::Exception);
        assert_eq!(result.trace[1].run.status, RunStatus::Ok);
        assert_eq!(result.answer_text(), Some("7"));
        assert_eq!(transport.calls(), 2);
    }

    #[test]
    fn pot_retries_budget_exhausted() {
        let Some(sandbox) = sandbox() else { return };
        let bad = "```python\ndef solve():\n    raise ValueError(\"nope\")\n```";
        let transport = Arc::new(ScriptedTransport::texts(&[bad, bad, bad]));
        let provider = Provider::new(transport.clone());
        let result =
            pot_retries_solve(&provider, &sandbox, &instance(), &BaselineConfig::default())
                .unwrap();
        assert_eq!(result.trace.len(), 3);
        assert!(result.final_answer.is_none());
        assert_eq!(transport.calls(), 3);
    }

    #[test]
    fn pot_retries_first_success_single_attempt() {
        let Some(sandbox) = sandbox() else { return };
        let transport = Arc::new(ScriptedTransport::texts(&[
            "```python\ndef solve():\n    return 3 + 4\n```",
        ]));
        let provider = Provider::new(transport.clone());
        let result =
            pot_retries_solve(&provider, &sandbox, &instance(), &BaselineConfig::default())
                .unwrap();
        assert_eq!(result.trace.len(), 1);
        assert_eq!(transport.calls(), 1);
    }

    #[test]
    fn final_answer_extraction_variants() {
        assert_eq!(
            extract_final_answer("FINAL ANSWER: brown"),
            Some("brown".into())
        );
        assert_eq!(
            extract_final_answer("...\nFINAL ANSWER:\n(B)\nthanks"),
            Some("(B)".into())
        );
        assert_eq!(extract_final_answer("no marker"), None);
    }
}
