//! The benchmark runner: dispatches instances to methods over a bounded
//! worker pool, appending records in dataset order so results files are
//! reproducible and resumable.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::answer::answers_match;
use crate::baselines::{self, BaselineConfig};
use crate::bench::records::{read_records, RecordIssues, RunRecord, SwitchInfo};
use crate::bench::Dataset;
use crate::error::{Error, Result};
use crate::instance::{ReasoningInstance, SplitTag};
use crate::provider::{Provider, TokenUsage};
use crate::sandbox::Sandbox;
use crate::switch::{self, CriteriaVector, Decision, LogisticModel};
use crate::synthesis::{self, LoopConfig};
use crate::trace::{SolveMethod, SolveResult};

/// Benchmark-level method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    Pips,
    PipsNoSwitch,
    Cot,
    Pot,
    PotRetries,
}

impl BenchMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BenchMethod::Pips => "pips",
            BenchMethod::PipsNoSwitch => "pips_no_switch",
            BenchMethod::Cot => "cot",
            BenchMethod::Pot => "pot",
            BenchMethod::PotRetries => "pot_retries",
        }
    }
}

impl std::str::FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pips" => BenchMethod::Pips,
            "pips_no_switch" | "pips-no-switch" => BenchMethod::PipsNoSwitch,
            "cot" => BenchMethod::Cot,
            "pot" => BenchMethod::Pot,
            "pot_retries" | "pot-retries" => BenchMethod::PotRetries,
            other => return Err(Error::Config(format!("unknown method '{other}'"))),
        })
    }
}

/// How the pips method routes between synthesis and CoT.
#[derive(Debug, Clone)]
pub enum SwitchMode {
    ZeroShot,
    Trained(LogisticModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitFilter {
    Evaluation,
    Calibration,
    All,
}

impl SplitFilter {
    fn admits(&self, tag: SplitTag) -> bool {
        match self {
            SplitFilter::Evaluation => {
                matches!(tag, SplitTag::Evaluation | SplitTag::Unassigned)
            }
            SplitFilter::Calibration => tag == SplitTag::Calibration,
            SplitFilter::All => true,
        }
    }
}

pub struct BenchConfig {
    pub method: BenchMethod,
    pub loop_cfg: LoopConfig,
    pub baseline_cfg: BaselineConfig,
    pub switch_mode: SwitchMode,
    /// Score the ten criteria and store them in records even for methods
    /// that do not route on them (feeds switch training).
    pub score_criteria: bool,
    pub concurrency: usize,
    pub split: SplitFilter,
    pub resume: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            method: BenchMethod::Pips,
            loop_cfg: LoopConfig::default(),
            baseline_cfg: BaselineConfig::default(),
            switch_mode: SwitchMode::ZeroShot,
            score_criteria: false,
            concurrency: 8,
            split: SplitFilter::Evaluation,
            resume: false,
        }
    }
}

fn split_name(tag: SplitTag) -> &'static str {
    match tag {
        SplitTag::Calibration => "calibration",
        SplitTag::Evaluation => "evaluation",
        SplitTag::Unassigned => "unassigned",
    }
}

/// Solve one instance under the configured method.
fn solve_instance(
    provider: &Provider,
    sandbox: &Sandbox,
    instance: &ReasoningInstance,
    cfg: &BenchConfig,
) -> Result<(SolveResult, Option<SwitchInfo>)> {
    let wants_criteria = cfg.score_criteria || cfg.method == BenchMethod::Pips;
    let mut switch_info: Option<SwitchInfo> = None;
    let mut criteria_usage = TokenUsage::default();
    let mut criteria: Option<CriteriaVector> = None;

    if wants_criteria {
        let (vector, usage) = switch::score_criteria(provider, &cfg.loop_cfg.model_id, instance)?;
        criteria_usage = usage;
        criteria = Some(vector);
    }

    let mut result = match cfg.method {
        BenchMethod::Pips => {
            let vector = criteria.clone().expect("criteria scored for pips");
            let (probability, decision) = match &cfg.switch_mode {
                SwitchMode::ZeroShot => (None, switch::zero_shot_decide(&vector)),
                SwitchMode::Trained(model) => {
                    let (p, d) = switch::decide(model, &vector);
                    (Some(p), d)
                }
            };
            switch_info = Some(SwitchInfo {
                criteria: vector,
                probability,
                decision: Some(decision),
            });
            match decision {
                Decision::Synthesis => {
                    synthesis::run_loop(provider, sandbox, instance, &cfg.loop_cfg)
                }
                Decision::Cot => baselines::cot_solve(provider, instance, &cfg.baseline_cfg)?,
            }
        }
        BenchMethod::PipsNoSwitch => {
            synthesis::run_loop(provider, sandbox, instance, &cfg.loop_cfg)
        }
        BenchMethod::Cot => baselines::cot_solve(provider, instance, &cfg.baseline_cfg)?,
        BenchMethod::Pot => baselines::pot_solve(provider, sandbox, instance, &cfg.baseline_cfg)?,
        BenchMethod::PotRetries => {
            baselines::pot_retries_solve(provider, sandbox, instance, &cfg.baseline_cfg)?
        }
    };
    if switch_info.is_none() {
        if let Some(vector) = criteria {
            switch_info = Some(SwitchInfo {
                criteria: vector,
                probability: None,
                decision: None,
            });
        }
    }
    result.usage.add(criteria_usage);
    Ok((result, switch_info))
}

fn record_from_result(
    instance: &ReasoningInstance,
    method: BenchMethod,
    result: SolveResult,
    switch_info: Option<SwitchInfo>,
    include_trace: bool,
) -> RunRecord {
    let correct = instance.gold_answer.as_ref().map(|gold| {
        result
            .final_answer
            .as_ref()
            .map(|answer| answers_match(answer, gold, &instance.answer_spec))
            .unwrap_or(false)
    });
    let issues = result
        .trace
        .last()
        .map(|t| RecordIssues::from_issue_set(&t.feedback.issues))
        .unwrap_or_default();
    RunRecord {
        instance_id: instance.id.clone(),
        task: instance.task_name.clone(),
        method: method.as_str().to_string(),
        solve_method: result.method.as_str().to_string(),
        split: split_name(instance.split_tag).to_string(),
        final_answer: result
            .final_answer
            .as_ref()
            .map(|a| a.canonical_text.clone()),
        correct,
        well_formed: result.well_formed,
        non_trivial: result.non_trivial,
        attempted_code: !result.trace.is_empty(),
        issues,
        switch: switch_info,
        usage: result.usage,
        cost_usd: result.cost_usd,
        warnings: result.warnings.clone(),
        error: None,
        trace: include_trace.then(|| RunRecord::scrubbed_trace(&result)),
        wall_seconds: result.wall_seconds,
    }
}

fn error_record(instance: &ReasoningInstance, method: BenchMethod, error: &Error) -> RunRecord {
    RunRecord {
        instance_id: instance.id.clone(),
        task: instance.task_name.clone(),
        method: method.as_str().to_string(),
        solve_method: match method {
            BenchMethod::Cot => SolveMethod::Cot.as_str().to_string(),
            BenchMethod::Pot => SolveMethod::Pot.as_str().to_string(),
            BenchMethod::PotRetries => SolveMethod::PotRetries.as_str().to_string(),
            _ => SolveMethod::Synthesis.as_str().to_string(),
        },
        split: split_name(instance.split_tag).to_string(),
        final_answer: None,
        correct: instance.gold_answer.as_ref().map(|_| false),
        well_formed: false,
        non_trivial: false,
        attempted_code: false,
        issues: RecordIssues::default(),
        switch: None,
        usage: TokenUsage::default(),
        cost_usd: 0.0,
        warnings: Vec::new(),
        error: Some(error.to_string()),
        trace: None,
        wall_seconds: 0.0,
    }
}

/// Writer that releases records strictly in submission order.
struct OrderedWriter {
    file: std::fs::File,
    next: usize,
    pending: BTreeMap<usize, RunRecord>,
    written: Vec<RunRecord>,
}

impl OrderedWriter {
    fn submit(&mut self, index: usize, record: RunRecord) -> Result<()> {
        self.pending.insert(index, record);
        while let Some(record) = self.pending.remove(&self.next) {
            writeln!(self.file, "{}", record.canonical_json())?;
            self.file.flush()?;
            self.written.push(record);
            self.next += 1;
        }
        Ok(())
    }
}

/// Run one method over the evaluation (or selected) split of the given
/// datasets, appending one record per instance to `results_path`.
///
/// Resumable: instances whose (id, method) already appear in the results
/// file are skipped. Per-instance failures become error records; they never
/// abort the run. Returns the records written by THIS invocation.
pub fn run_benchmark(
    provider: &Provider,
    sandbox: &Sandbox,
    datasets: &[Dataset],
    cfg: &BenchConfig,
    results_path: impl AsRef<Path>,
    include_trace: bool,
) -> Result<Vec<RunRecord>> {
    let results_path = results_path.as_ref();
    let mut done: BTreeSet<(String, String)> = BTreeSet::new();
    if cfg.resume {
        for record in read_records(results_path)? {
            done.insert((record.instance_id.clone(), record.method.clone()));
        }
    } else if results_path.exists() && !cfg.resume {
        // A fresh run over an existing file would duplicate keys.
        let existing = read_records(results_path)?;
        if !existing.is_empty() {
            return Err(Error::Config(format!(
                "results file {} already has {} records; pass resume to continue it",
                results_path.display(),
                existing.len()
            )));
        }
    }

    let jobs: Vec<&ReasoningInstance> = datasets
        .iter()
        .flat_map(|d| d.instances.iter())
        .filter(|i| cfg.split.admits(i.split_tag))
        .filter(|i| !done.contains(&(i.id.clone(), cfg.method.as_str().to_string())))
        .collect();

    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(results_path)?;
    let writer = Mutex::new(OrderedWriter {
        file,
        next: 0,
        pending: BTreeMap::new(),
        written: Vec::new(),
    });
    let cursor = AtomicUsize::new(0);
    let workers = cfg.concurrency.max(1).min(jobs.len().max(1));

    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for _ in 0..workers {
            handles.push(scope.spawn(|| -> Result<()> {
                loop {
                    let index = cursor.fetch_add(1, Ordering::Relaxed);
                    if index >= jobs.len() {
                        return Ok(());
                    }
                    let instance = jobs[index];
                    let record = match solve_instance(provider, sandbox, instance, cfg) {
                        Ok((result, switch_info)) => record_from_result(
                            instance,
                            cfg.method,
                            result,
                            switch_info,
                            include_trace,
                        ),
                        Err(e) => error_record(instance, cfg.method, &e),
                    };
                    writer.lock().expect("writer lock").submit(index, record)?;
                }
            }));
        }
        for handle in handles {
            handle.join().expect("worker panicked")?;
        }
        Ok(())
    })?;

    let writer = writer.into_inner().expect("writer lock");
    debug_assert!(writer.pending.is_empty());
    Ok(writer.written)
}

/// Decisive-instance training pairs from paired synthesis/CoT records:
/// keep instances where exactly one method was correct; label true when
/// synthesis solved it. Criteria come from whichever record carries them.
pub fn decisive_pairs(
    synthesis_records: &[RunRecord],
    cot_records: &[RunRecord],
) -> Vec<(String, CriteriaVector, bool)> {
    let cot_by_id: BTreeMap<&str, &RunRecord> = cot_records
        .iter()
        .map(|r| (r.instance_id.as_str(), r))
        .collect();
    let mut pairs = Vec::new();
    for synth in synthesis_records {
        let Some(cot) = cot_by_id.get(synth.instance_id.as_str()) else {
            continue;
        };
        let (Some(synth_ok), Some(cot_ok)) = (synth.correct, cot.correct) else {
            continue;
        };
        if synth_ok == cot_ok {
            continue; // not decisive
        }
        let criteria = synth
            .switch
            .as_ref()
            .or(cot.switch.as_ref())
            .map(|s| s.criteria.clone());
        if let Some(criteria) = criteria {
            pairs.push((synth.task.clone(), criteria, synth_ok));
        }
    }
    pairs
}

/// Group decisive pairs by task for leave-one-dataset-out evaluation.
pub fn build_switch_training(
    pairs: &[(String, CriteriaVector, bool)],
) -> (
    Vec<(CriteriaVector, bool)>,
    BTreeMap<String, Vec<(CriteriaVector, bool)>>,
) {
    let mut flat = Vec::new();
    let mut grouped: BTreeMap<String, Vec<(CriteriaVector, bool)>> = BTreeMap::new();
    for (task, vector, label) in pairs {
        flat.push((vector.clone(), *label));
        grouped
            .entry(task.clone())
            .or_default()
            .push((vector.clone(), *label));
    }
    (flat, grouped)
}
