//! Solve results and per-iteration traces.

use serde::{Deserialize, Serialize};

use crate::answer::AnswerValue;
use crate::evaluator::Feedback;
use crate::program::ProgramArtifact;
use crate::provider::TokenUsage;
use crate::sandbox::RunOutcome;
use crate::symbols::SymbolStore;

/// Which solving strategy produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Synthesis,
    Cot,
    Pot,
    PotRetries,
}

impl SolveMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveMethod::Synthesis => "synthesis",
            SolveMethod::Cot => "cot",
            SolveMethod::Pot => "pot",
            SolveMethod::PotRetries => "pot_retries",
        }
    }
}

/// How an iteration came to be, or how the loop ended there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceAction {
    /// The first generated symbols/program pair.
    Initial,
    RevisedProgram,
    RevisedSymbols,
    RevisedBoth,
    /// The model declared this iteration's program final.
    Finished,
    /// The iteration budget ran out at this trace.
    Exhausted,
}

/// One loop iteration: the state evaluated plus what happened next.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationTrace {
    pub index: u32,
    pub symbols: SymbolStore,
    pub program: ProgramArtifact,
    pub run: RunOutcome,
    pub feedback: Feedback,
    pub action: TraceAction,
    /// Model usage attributable to this iteration (generation or refinement
    /// calls that produced it, plus its judge call).
    pub usage: TokenUsage,
}

/// Outcome of solving one instance with one method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub method: SolveMethod,
    pub final_answer: Option<AnswerValue>,
    pub trace: Vec<IterationTrace>,
    pub usage: TokenUsage,
    pub cost_usd: f64,
    pub well_formed: bool,
    pub non_trivial: bool,
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SolveResult {
    pub fn answer_text(&self) -> Option<&str> {
        self.final_answer
            .as_ref()
            .map(|a| a.canonical_text.as_str())
    }
}
