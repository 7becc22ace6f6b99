//! Run records and their canonical JSONL serialization.
//!
//! One record per (instance, method) per run. Canonical serialization
//! excludes wall-clock timings (and scrubs durations inside traces) so that
//! replay-mode runs produce byte-identical results files.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evaluator::{IssueCategory, IssueSet};
use crate::provider::TokenUsage;
use crate::switch::{CriteriaVector, Decision};
use crate::trace::{IterationTrace, SolveResult};

/// Issue flags carried into records (messages dropped).
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct RecordIssues {
    pub syntax_error: bool,
    pub trivial: bool,
    pub placeholder: bool,
    pub example_usage: bool,
    pub wrong_return_type: bool,
    pub returns_null: bool,
    pub raw_media_processing: bool,
}

impl RecordIssues {
    pub fn from_issue_set(issues: &IssueSet) -> Self {
        Self {
            syntax_error: issues.syntax_error,
            trivial: issues.trivial,
            placeholder: issues.placeholder,
            example_usage: issues.example_usage,
            wrong_return_type: issues.wrong_return_type,
            returns_null: issues.returns_null,
            raw_media_processing: issues.raw_media_processing,
        }
    }

    /// Reporting category under the syntax > placeholder > type > trivial
    /// precedence.
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

/// Switch data captured for an instance, when criteria were scored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwitchInfo {
    pub criteria: CriteriaVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub task: String,
    /// Benchmark method that produced this record (pips, cot, ...).
    pub method: String,
    /// Strategy that actually answered (synthesis or cot for pips).
    pub solve_method: String,
    pub split: String,
    pub final_answer: Option<String>,
    /// Defined only when the instance has a gold answer.
    pub correct: Option<bool>,
    pub well_formed: bool,
    pub non_trivial: bool,
    /// Whether any program was generated for this instance.
    pub attempted_code: bool,
    pub issues: RecordIssues,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch: Option<SwitchInfo>,
    pub usage: TokenUsage,
    pub cost_usd: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Verbosity-gated; durations are scrubbed before serialization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<IterationTrace>>,
    /// Wall-clock seconds; excluded from the canonical serialization.
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl RunRecord {
    /// Canonical single-line JSON (timings excluded by construction).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("record serialization cannot fail")
    }

    /// Copy the trace out of a solve result with durations zeroed, keeping
    /// record bytes deterministic under replay.
    pub fn scrubbed_trace(result: &SolveResult) -> Vec<IterationTrace> {
        result
            .trace
            .iter()
            .cloned()
            .map(|mut t| {
                t.run.duration_seconds = 0.0;
                if let Some(run) = t.feedback.run.as_mut() {
                    run.duration_seconds = 0.0;
                }
                t
            })
            .collect()
    }
}

/// Read all records from a JSONL results file (missing file = empty).
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let file = match std::fs::File::open(path) {
        Ok(file) => file,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

/// Append records to a results file in order.
pub fn append_records(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path.as_ref())?;
    for record in records {
        writeln!(file, "{}", record.canonical_json())?;
    }
    file.flush()?;
    Ok(())
}
