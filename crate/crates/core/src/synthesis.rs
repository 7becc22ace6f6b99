//! The per-instance synthesis loop.
//!
//! One solve is a conversation: the initial request extracts symbols and a
//! first program; each following turn executes the current program in the
//! sandbox, runs the structural evaluator and the judge, and asks the
//! generator to either fix the issues or declare the program finished. The
//! loop stops at FINISHED (pass) or after `max_iterations` refinements,
//! falling back to the last program's answer.
//!
//! Multiple fenced blocks in one response resolve last-block-wins; a
//! response that both says FINISHED and carries blocks counts as a revision
//! (emitting code signals intent to change it). Responses with neither are
//! re-prompted once, then treated as finished with a recorded warning.

use std::time::Instant;

use crate::answer::normalize_answer;
use crate::error::{Error, Result};
use crate::evaluator::{self, AnalyzerConfig, Feedback};
use crate::fenced::{self, FencedBlock};
use crate::instance::ReasoningInstance;
use crate::program::ProgramArtifact;
use crate::prompts;
use crate::provider::{estimate_cost, PriceSheet};
use crate::provider::{Message, ModelRequest, Provider, TokenUsage};
use crate::sandbox::{ExecLimits, RunOutcome, RunStatus, Sandbox};
use crate::symbols::SymbolStore;
use crate::trace::{IterationTrace, SolveMethod, SolveResult, TraceAction};

/// Loop parameters. `max_iterations` is the refinement budget k.
#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub max_iterations: u32,
    pub limits: ExecLimits,
    pub model_id: String,
    pub analyzer: AnalyzerConfig,
    pub prices: PriceSheet,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            max_iterations: 30,
            limits: ExecLimits::default(),
            model_id: "default-model".to_string(),
            analyzer: AnalyzerConfig::default(),
            prices: PriceSheet::default(),
        }
    }
}

/// What a refinement turn decided.
#[derive(Debug)]
pub enum RefineOutcome {
    Finished,
    Revised {
        symbols: Option<SymbolStore>,
        program: Option<ProgramArtifact>,
    },
}

fn last_json_block(blocks: &[FencedBlock]) -> Option<&FencedBlock> {
    fenced::last_block_tagged(blocks, "json")
}

fn last_code_block(blocks: &[FencedBlock]) -> Option<&FencedBlock> {
    blocks
        .iter()
        .rev()
        .find(|b| !b.tag.eq_ignore_ascii_case("json") && !b.body.trim().is_empty())
}

/// Extract (symbols, program) from a generation response.
fn parse_generation(text: &str) -> (Option<Result<SymbolStore>>, Option<String>) {
    let blocks = fenced::parse_fenced_blocks(text);
    let symbols = last_json_block(&blocks).map(|b| SymbolStore::from_json(&b.body));
    let program = last_code_block(&blocks).map(|b| b.body.clone());
    (symbols, program)
}

/// Run the initial prompt: extract symbols and generate the first program.
///
/// A response missing either block (or with malformed JSON) is re-prompted
/// once; persistent failure is a `MissingBlock` error.
pub fn generate_initial(
    provider: &Provider,
    instance: &ReasoningInstance,
    cfg: &LoopConfig,
    transcript: &mut Vec<Message>,
    usage: &mut TokenUsage,
    warnings: &mut Vec<String>,
) -> Result<(SymbolStore, ProgramArtifact)> {
    let rendered = prompts::render(
        prompts::GENERATE_INITIAL,
        &[("question", instance.query_text.as_str())],
    );
    let mut first = evaluator::instance_message(instance)?;
    // The template embeds the question; attachments ride along as parts.
    first.parts[0] = crate::provider::Part::Text(rendered);
    transcript.push(first);

    for attempt in 0..2 {
        let request = ModelRequest::new(&cfg.model_id, transcript.clone());
        let response = provider.complete(&request)?;
        usage.add(response.usage);
        transcript.push(Message::assistant(response.text.clone()));

        let (symbols, program) = parse_generation(&response.text);
        match (symbols, program) {
            (Some(Ok(symbols)), Some(source)) => {
                return Ok((symbols, ProgramArtifact::new(source, 0)));
            }
            (symbols, program) => {
                if attempt == 0 {
                    if let Some(Err(e)) = symbols {
                        warnings.push(format!("initial symbols block malformed: {e}"));
                    } else if program.is_none() {
                        warnings.push("initial response missing a code block".to_string());
                    } else {
                        warnings.push("initial response missing a JSON block".to_string());
                    }
                    transcript.push(Message::user(prompts::REPROMPT_BLOCKS.to_string()));
                }
            }
        }
    }
    Err(Error::MissingBlock(
        "initial generation produced no parseable symbols + program after one re-prompt".into(),
    ))
}

/// Compose the checker summary the refinement prompt shows the generator:
/// deterministic analyzer findings first, then the judge's critique.
pub fn checker_output(feedback: &Feedback) -> String {
    let mut sections = Vec::new();
    if feedback.issues.any_flag() {
        sections.push(feedback.issues.messages.join("\n"));
    }
    if !feedback.judge_summary.trim().is_empty() {
        sections.push(feedback.judge_summary.trim().to_string());
    }
    if sections.is_empty() {
        "No issues found by the automatic checks.".to_string()
    } else {
        sections.join("\n\n")
    }
}

/// Render the refinement prompt for a run and checker summary.
pub fn render_refine_prompt(run: &RunOutcome, checker_output: &str) -> String {
    prompts::render(
        prompts::REFINE,
        &[
            ("output", evaluator::render_return_value(run).as_str()),
            ("stdout", run.stdout.as_str()),
            ("err", run.exception_text.as_str()),
            ("checker_output", checker_output),
        ],
    )
}

/// One refinement turn against the latest trace's run and feedback.
pub fn refine_step(
    provider: &Provider,
    cfg: &LoopConfig,
    transcript: &mut Vec<Message>,
    run: &RunOutcome,
    feedback: &Feedback,
    usage: &mut TokenUsage,
    warnings: &mut Vec<String>,
) -> Result<RefineOutcome> {
    let rendered = render_refine_prompt(run, &checker_output(feedback));
    transcript.push(Message::user(rendered));

    for attempt in 0..2 {
        let request = ModelRequest::new(&cfg.model_id, transcript.clone());
        let response = provider.complete(&request)?;
        usage.add(response.usage);
        transcript.push(Message::assistant(response.text.clone()));

        let blocks = fenced::parse_fenced_blocks(&response.text);
        let meaningful: Vec<&FencedBlock> = blocks
            .iter()
            .filter(|b| !b.body.trim().is_empty() && b.body.trim() != "FINISHED")
            .collect();

        if !meaningful.is_empty() {
            // Blocks win over any FINISHED text: emitted code signals intent.
            let symbols =
                last_json_block(&blocks).and_then(|b| match SymbolStore::from_json(&b.body) {
                    Ok(s) => Some(s),
                    Err(e) => {
                        warnings.push(format!(
                            "revised symbols block malformed, kept previous: {e}"
                        ));
                        None
                    }
                });
            let program = last_code_block(&blocks).map(|b| b.body.clone());
            if symbols.is_some() || program.is_some() {
                return Ok(RefineOutcome::Revised {
                    symbols,
                    program: program.map(|src| ProgramArtifact::new(src, 0)),
                });
            }
        }

        let stripped: String = response
            .text
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '`')
            .collect();
        if stripped == "FINISHED" || stripped.eq_ignore_ascii_case("finished") {
            return Ok(RefineOutcome::Finished);
        }

        if attempt == 0 {
            transcript.push(Message::user(prompts::REPROMPT_REFINE.to_string()));
        }
    }
    warnings.push(
        "refinement response had neither FINISHED nor blocks after one re-prompt; treated as finished"
            .to_string(),
    );
    Ok(RefineOutcome::Finished)
}

/// Run the full synthesis loop on one instance.
///
/// Hard provider failures abort the loop and are recorded as warnings on
/// the partial result rather than propagating, so benchmark runs keep
/// going; the trace always reflects every model call and sandbox run made.
pub fn run_loop(
    provider: &Provider,
    sandbox: &Sandbox,
    instance: &ReasoningInstance,
    cfg: &LoopConfig,
) -> SolveResult {
    let started = Instant::now();
    let mut transcript: Vec<Message> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut total_usage = TokenUsage::default();
    let mut trace: Vec<IterationTrace> = Vec::new();

    let mut iteration_usage = TokenUsage::default();
    let generated = generate_initial(
        provider,
        instance,
        cfg,
        &mut transcript,
        &mut iteration_usage,
        &mut warnings,
    );
    let (mut symbols, mut program) = match generated {
        Ok(pair) => pair,
        Err(e) => {
            warnings.push(format!("initial generation failed: {e}"));
            total_usage.add(iteration_usage);
            return SolveResult {
                method: SolveMethod::Synthesis,
                final_answer: None,
                trace,
                usage: total_usage,
                cost_usd: estimate_cost(total_usage, &cfg.prices),
                well_formed: false,
                non_trivial: false,
                wall_seconds: started.elapsed().as_secs_f64(),
                warnings,
            };
        }
    };

    // `origin` is how the CURRENT (symbols, program) pair came to be; it is
    // recorded on that pair's trace unless a terminal action overrides it.
    let mut origin = TraceAction::Initial;
    let mut index: u32 = 0;
    loop {
        let run = sandbox.execute(&program, &symbols, &cfg.limits);
        let issues = evaluator::analyze(&program, &run, &instance.answer_spec, &cfg.analyzer);

        let mut push_trace =
            |action: TraceAction, feedback: Feedback, run: RunOutcome, usage_now: TokenUsage| {
                trace.push(IterationTrace {
                    index,
                    symbols: symbols.clone(),
                    program: program.clone(),
                    run,
                    feedback,
                    action,
                    usage: usage_now,
                });
            };

        if index >= cfg.max_iterations {
            // Budget exhausted: no judge call, fall back to this program.
            let feedback = Feedback {
                issues,
                run: Some(run.clone()),
                ..Default::default()
            };
            total_usage.add(iteration_usage);
            push_trace(TraceAction::Exhausted, feedback, run, iteration_usage);
            break;
        }

        let judge_result =
            evaluator::run_judge(provider, &cfg.model_id, instance, &symbols, &program, &run);
        let (judge_summary, symbol_issues, program_issues) = match judge_result {
            Ok((summary, symbol_issues, program_issues, response)) => {
                iteration_usage.add(response.usage);
                (summary, symbol_issues, program_issues)
            }
            Err(e) => {
                warnings.push(format!("judge call failed, aborting loop: {e}"));
                let feedback = Feedback {
                    issues,
                    run: Some(run.clone()),
                    ..Default::default()
                };
                total_usage.add(iteration_usage);
                push_trace(TraceAction::Exhausted, feedback, run, iteration_usage);
                break;
            }
        };
        let feedback = Feedback {
            issues,
            run: Some(run.clone()),
            judge_summary,
            symbol_issues,
            program_issues,
        };

        let refine = refine_step(
            provider,
            cfg,
            &mut transcript,
            &run,
            &feedback,
            &mut iteration_usage,
            &mut warnings,
        );
        match refine {
            Ok(RefineOutcome::Finished) => {
                total_usage.add(iteration_usage);
                push_trace(TraceAction::Finished, feedback, run, iteration_usage);
                break;
            }
            Ok(RefineOutcome::Revised {
                symbols: new_symbols,
                program: new_program,
            }) => {
                let next_origin = match (&new_symbols, &new_program) {
                    (Some(_), Some(_)) => TraceAction::RevisedBoth,
                    (Some(_), None) => TraceAction::RevisedSymbols,
                    _ => TraceAction::RevisedProgram,
                };
                total_usage.add(iteration_usage);
                push_trace(origin, feedback, run, iteration_usage);
                // Carry forward whatever the revision did not replace.
                if let Some(new_symbols) = new_symbols {
                    symbols = new_symbols;
                }
                if let Some(mut new_program) = new_program {
                    new_program.origin_iteration = index + 1;
                    program = new_program;
                }
                origin = next_origin;
                iteration_usage = TokenUsage::default();
                index += 1;
            }
            Err(e) => {
                warnings.push(format!("refinement call failed, aborting loop: {e}"));
                total_usage.add(iteration_usage);
                push_trace(TraceAction::Exhausted, feedback, run, iteration_usage);
                break;
            }
        }
    }

    finalize(instance, cfg, trace, total_usage, warnings, started)
}

fn finalize(
    instance: &ReasoningInstance,
    cfg: &LoopConfig,
    trace: Vec<IterationTrace>,
    usage: TokenUsage,
    warnings: Vec<String>,
    started: Instant,
) -> SolveResult {
    let (final_answer, well_formed, non_trivial) = match trace.last() {
        Some(last) => {
            let answer = if last.run.status == RunStatus::Ok {
                last.run
                    .return_value
                    .as_ref()
                    .and_then(|v| normalize_answer(v, &instance.answer_spec).ok())
            } else {
                None
            };
            (
                answer,
                evaluator::is_well_formed(&last.feedback.issues, &last.run),
                evaluator::is_non_trivial(&last.feedback.issues, &last.run),
            )
        }
        None => (None, false, false),
    };
    SolveResult {
        method: SolveMethod::Synthesis,
        final_answer,
        cost_usd: estimate_cost(usage, &cfg.prices),
        usage,
        trace,
        well_formed,
        non_trivial,
        wall_seconds: started.elapsed().as_secs_f64(),
        warnings,
    }
}
