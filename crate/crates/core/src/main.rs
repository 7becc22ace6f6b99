//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 hard failure, 2 configuration error. Reports go
//! to stdout; machine artifacts (results, reports, models, CSV) go to
//! files as JSON/JSONL/CSV with no ANSI.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use symsolve::answer::AnswerKind;
use symsolve::baselines::{self, BaselineConfig};
use symsolve::bench::{
    self, build_switch_training, decisive_pairs, run_benchmark, BenchConfig, BenchMethod,
    SplitFilter, SwitchMode,
};
use symsolve::config::EngineConfig;
use symsolve::error::Error;
use symsolve::evaluator::{self, AnalyzerConfig};
use symsolve::instance::ReasoningInstance;
use symsolve::program::ProgramArtifact;
use symsolve::provider::{CacheMode, HttpTransport, Provider, ReplayCache};
use symsolve::sandbox::Sandbox;
use symsolve::switch::{self, Decision, LogisticModel};
use symsolve::symbols::SymbolStore;
use symsolve::synthesis::{self, LoopConfig};
use symsolve::trace::SolveResult;

#[derive(Parser)]
#[command(
    name = "symsolve",
    version,
    about = "Per-instance reasoning engine: program synthesis with structural feedback, routed against chain-of-thought by a calibrated switch"
)]
struct Cli {
    /// Path to a TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. --set bench.seed=5 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Seed for dataset splitting and anything randomized.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cache mode: record | replay | passthrough.
    #[arg(long, global = true, value_name = "MODE")]
    cache_mode: Option<String>,

    /// Cache directory for record/replay.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,

    /// Shorthand for --cache-mode replay --cache-dir DIR.
    #[arg(long, global = true, value_name = "DIR")]
    replay: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single question or instance file.
    Solve {
        /// Instance JSON file ({"question": ..., "answer"?, ...}).
        file: Option<PathBuf>,
        /// Inline question text (alternative to an instance file).
        #[arg(long)]
        question: Option<String>,
        /// pips | synthesis | cot | pot | pot_retries
        #[arg(long, default_value = "pips")]
        method: String,
        /// Print one line per loop iteration.
        #[arg(long)]
        trace: bool,
    },
    /// Run a benchmark method over datasets, writing a results JSONL.
    Bench {
        /// Dataset JSONL paths.
        #[arg(long, required = true, num_args = 1..)]
        datasets: Vec<PathBuf>,
        /// pips | pips_no_switch | cot | pot | pot_retries
        #[arg(long)]
        method: String,
        /// Results JSONL output path.
        #[arg(long)]
        results: PathBuf,
        /// Also write the aggregate report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write per-task accuracy CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Skip instances already present in the results file.
        #[arg(long)]
        resume: bool,
        /// evaluation | calibration | all
        #[arg(long, default_value = "evaluation")]
        split: String,
        /// Score the ten switch criteria for every record.
        #[arg(long)]
        score_criteria: bool,
        /// Embed scrubbed iteration traces in records.
        #[arg(long)]
        trace: bool,
    },
    /// Train the logistic switch from paired results files.
    TrainSwitch {
        /// Results JSONL from a synthesis-for-all run (pips_no_switch).
        #[arg(long)]
        synthesis: PathBuf,
        /// Results JSONL from a cot run over the same instances.
        #[arg(long)]
        cot: PathBuf,
        /// Output model JSON path.
        #[arg(long)]
        out: PathBuf,
        /// Also print the leave-one-dataset-out table.
        #[arg(long)]
        lodo: bool,
        /// Write the training-set reliability table as CSV.
        #[arg(long)]
        calibration_csv: Option<PathBuf>,
        /// Number of reliability bins.
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Analyze a guest source file (IssueSet JSON) or a results file
    /// (issue-category rates).
    Analyze {
        input: PathBuf,
        /// Execute the program against these symbols (JSON file) first.
        #[arg(long)]
        symbols: Option<PathBuf>,
        /// Answer kind for return-shape checks when --symbols is given.
        #[arg(long, default_value = "free_text")]
        kind: String,
    },
    /// Assign calibration/evaluation tags and print them.
    Split {
        #[arg(long)]
        dataset: PathBuf,
        /// Calibration fraction (defaults to the config value).
        #[arg(long)]
        fraction: Option<f64>,
        /// Write the id→split table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a results file into a report.
    Report {
        #[arg(long)]
        results: PathBuf,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write per-task accuracy CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also print token/cost accounting.
        #[arg(long)]
        cost: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::SchemaError { .. } | Error::AuthFailure(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<EngineConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => EngineConfig::load(path)?,
        None => EngineConfig::default(),
    };
    for spec in &cli.overrides {
        cfg.apply_override(spec)?;
    }
    if let Some(seed) = cli.seed {
        cfg.bench.seed = seed;
    }
    if let Some(dir) = &cli.replay {
        cfg.cache.mode = "replay".to_string();
        cfg.cache.dir = Some(dir.clone());
    }
    if let Some(mode) = &cli.cache_mode {
        cfg.cache.mode = mode.clone();
    }
    if let Some(dir) = &cli.cache_dir {
        cfg.cache.dir = Some(dir.clone());
    }
    Ok(cfg)
}

fn build_provider(cfg: &EngineConfig) -> Result<Provider, Error> {
    let mode: CacheMode = cfg.cache.mode.parse()?;
    let cache = match (&cfg.cache.dir, mode) {
        (Some(dir), CacheMode::Record | CacheMode::Replay) => Some(ReplayCache::open(dir)?),
        (None, CacheMode::Record | CacheMode::Replay) => {
            return Err(Error::Config(format!(
                "cache mode '{}' requires cache.dir (or --cache-dir)",
                cfg.cache.mode
            )));
        }
        _ => None,
    };
    if mode == CacheMode::Replay {
        return Ok(Provider::replay_only(cache.expect("checked above")));
    }
    let api_key = std::env::var(&cfg.provider.api_key_env).map_err(|_| {
        Error::AuthFailure(format!(
            "environment variable {} is not set (required outside replay mode)",
            cfg.provider.api_key_env
        ))
    })?;
    let transport = Arc::new(HttpTransport::new(&cfg.provider.base_url, api_key));
    let mut provider = Provider::new(transport);
    if let Some(cache) = cache {
        provider = provider.with_cache(cache, mode);
    }
    Ok(provider)
}

fn loop_config(cfg: &EngineConfig) -> LoopConfig {
    LoopConfig {
        max_iterations: cfg.bench.max_iterations,
        limits: cfg.limits.to_exec_limits(),
        model_id: cfg.provider.model_id.clone(),
        analyzer: cfg.analyzer.clone(),
        prices: cfg.prices,
    }
}

fn baseline_config(cfg: &EngineConfig) -> BaselineConfig {
    BaselineConfig {
        model_id: cfg.provider.model_id.clone(),
        pot_max_retries: cfg.bench.pot_max_retries,
        limits: cfg.limits.to_exec_limits(),
        analyzer: cfg.analyzer.clone(),
        prices: cfg.prices,
    }
}

fn switch_mode(cfg: &EngineConfig) -> Result<SwitchMode, Error> {
    match cfg.switch.mode.as_str() {
        "zero_shot" => Ok(SwitchMode::ZeroShot),
        "trained" => {
            let path = cfg.switch.model_path.as_ref().ok_or_else(|| {
                Error::Config("switch.mode = trained requires switch.model_path".into())
            })?;
            let mut model = LogisticModel::load(path)?;
            model.threshold = cfg.switch.threshold;
            Ok(SwitchMode::Trained(model))
        }
        other => Err(Error::Config(format!("unknown switch mode '{other}'"))),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Solve {
            file,
            question,
            method,
            trace,
        } => cmd_solve(&cfg, file.as_deref(), question.as_deref(), method, *trace),
        Command::Bench {
            datasets,
            method,
            results,
            report,
            csv,
            resume,
            split,
            score_criteria,
            trace,
        } => cmd_bench(
            &cfg,
            datasets,
            method,
            results,
            report.as_deref(),
            csv.as_deref(),
            *resume,
            split,
            *score_criteria,
            *trace,
        ),
        Command::TrainSwitch {
            synthesis,
            cot,
            out,
            lodo,
            calibration_csv,
            bins,
        } => cmd_train_switch(
            synthesis,
            cot,
            out,
            *lodo,
            calibration_csv.as_deref(),
            *bins,
        ),
        Command::Analyze {
            input,
            symbols,
            kind,
        } => cmd_analyze(&cfg, input, symbols.as_deref(), kind),
        Command::Split {
            dataset,
            fraction,
            out,
        } => cmd_split(&cfg, dataset, *fraction, out.as_deref()),
        Command::Report {
            results,
            json,
            csv,
            cost,
        } => cmd_report(&cfg, results, json.as_deref(), csv.as_deref(), *cost),
    }
}

fn print_solve_result(result: &SolveResult, trace: bool) {
    match result.answer_text() {
        Some(answer) => println!("answer: {answer}"),
        None => println!("no answer"),
    }
    println!(
        "method: {}   well-formed: {}   non-trivial: {}",
        result.method.as_str(),
        result.well_formed,
        result.non_trivial
    );
    println!(
        "tokens: {} in / {} out   cost: ${:.6}   wall: {:.2}s",
        result.usage.input_tokens, result.usage.output_tokens, result.cost_usd, result.wall_seconds
    );
    for warning in &result.warnings {
        println!("warning: {warning}");
    }
    if trace {
        for entry in &result.trace {
            let issues = &entry.feedback.issues;
            let action = match entry.action {
                symsolve::trace::TraceAction::Initial => "initial",
                symsolve::trace::TraceAction::RevisedProgram => "revised_program",
                symsolve::trace::TraceAction::RevisedSymbols => "revised_symbols",
                symsolve::trace::TraceAction::RevisedBoth => "revised_both",
                symsolve::trace::TraceAction::Finished => "finished",
                symsolve::trace::TraceAction::Exhausted => "exhausted",
            };
            println!(
                "iter {:>2} [{action}] status={:?} syntax={} trivial={} placeholder={} example={} type={} null={} media={} symbol_issues={} program_issues={}",
                entry.index,
                entry.run.status,
                issues.syntax_error,
                issues.trivial,
                issues.placeholder,
                issues.example_usage,
                issues.wrong_return_type,
                issues.returns_null,
                issues.raw_media_processing,
                entry.feedback.symbol_issues.len(),
                entry.feedback.program_issues.len(),
            );
        }
    }
}

fn cmd_solve(
    cfg: &EngineConfig,
    file: Option<&Path>,
    question: Option<&str>,
    method: &str,
    trace: bool,
) -> Result<(), Error> {
    let instance = match (file, question) {
        (Some(path), _) => bench::load_instance(path)?,
        (None, Some(text)) => ReasoningInstance::text_only(
            "cli",
            "adhoc",
            text,
            symsolve::answer::AnswerSpec::free_text(),
        ),
        (None, None) => {
            return Err(Error::Config(
                "solve needs an instance file or --question".into(),
            ))
        }
    };
    let provider = build_provider(cfg)?;
    let sandbox = Sandbox::new(&cfg.sandbox.interpreter, cfg.sandbox.max_concurrent);
    let loop_cfg = loop_config(cfg);
    let baseline_cfg = baseline_config(cfg);

    let result = match method {
        "synthesis" => synthesis::run_loop(&provider, &sandbox, &instance, &loop_cfg),
        "cot" => baselines::cot_solve(&provider, &instance, &baseline_cfg)?,
        "pot" => baselines::pot_solve(&provider, &sandbox, &instance, &baseline_cfg)?,
        "pot_retries" | "pot-retries" => {
            baselines::pot_retries_solve(&provider, &sandbox, &instance, &baseline_cfg)?
        }
        "pips" => {
            let (vector, criteria_usage) =
                switch::score_criteria(&provider, &cfg.provider.model_id, &instance)?;
            let decision = match switch_mode(cfg)? {
                SwitchMode::ZeroShot => switch::zero_shot_decide(&vector),
                SwitchMode::Trained(model) => switch::decide(&model, &vector).1,
            };
            println!("switch decision: {}", decision.as_str());
            let mut result = match decision {
                Decision::Synthesis => {
                    synthesis::run_loop(&provider, &sandbox, &instance, &loop_cfg)
                }
                Decision::Cot => baselines::cot_solve(&provider, &instance, &baseline_cfg)?,
            };
            result.usage.add(criteria_usage);
            result
        }
        other => {
            return Err(Error::Config(format!(
                "unknown solve method '{other}' (expected pips, synthesis, cot, pot, pot_retries)"
            )))
        }
    };
    print_solve_result(&result, trace);
    if let Some(gold) = &instance.gold_answer {
        let correct = result
            .final_answer
            .as_ref()
            .map(|a| symsolve::answer::answers_match(a, gold, &instance.answer_spec))
            .unwrap_or(false);
        println!("gold: {}   correct: {}", gold.canonical_text, correct);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    cfg: &EngineConfig,
    dataset_paths: &[PathBuf],
    method: &str,
    results: &Path,
    report_out: Option<&Path>,
    csv_out: Option<&Path>,
    resume: bool,
    split: &str,
    score_criteria: bool,
    trace: bool,
) -> Result<(), Error> {
    let method: BenchMethod = method.parse()?;
    let split = match split {
        "evaluation" | "eval" => SplitFilter::Evaluation,
        "calibration" => SplitFilter::Calibration,
        "all" => SplitFilter::All,
        other => return Err(Error::Config(format!("unknown split '{other}'"))),
    };
    let mut datasets = Vec::new();
    for path in dataset_paths {
        let mut dataset = bench::load_dataset(path)?;
        bench::split_calibration(&mut dataset, cfg.bench.calibration_fraction, cfg.bench.seed)?;
        datasets.push(dataset);
    }
    let provider = build_provider(cfg)?;
    let sandbox = Sandbox::new(&cfg.sandbox.interpreter, cfg.sandbox.max_concurrent);
    let bench_cfg = BenchConfig {
        method,
        loop_cfg: loop_config(cfg),
        baseline_cfg: baseline_config(cfg),
        switch_mode: switch_mode(cfg)?,
        score_criteria,
        concurrency: cfg.bench.concurrency,
        split,
        resume,
    };
    let written = run_benchmark(&provider, &sandbox, &datasets, &bench_cfg, results, trace)?;
    println!("wrote {} records to {}", written.len(), results.display());

    let all_records = bench::read_records(results)?;
    let report = bench::build_report(&all_records)?;
    print!("{}", report.render_text());
    if let Some(path) = report_out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
        println!("report written to {}", path.display());
    }
    if let Some(path) = csv_out {
        std::fs::write(path, report.accuracy_csv())?;
        println!("csv written to {}", path.display());
    }
    let failures = all_records.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        println!("note: {failures} records carry per-instance errors");
    }
    Ok(())
}

fn cmd_train_switch(
    synthesis_path: &Path,
    cot_path: &Path,
    out: &Path,
    lodo: bool,
    calibration_csv: Option<&Path>,
    bins: usize,
) -> Result<(), Error> {
    let synth_records: Vec<_> = bench::read_records(synthesis_path)?
        .into_iter()
        .filter(|r| r.split == "calibration")
        .collect();
    let cot_records: Vec<_> = bench::read_records(cot_path)?
        .into_iter()
        .filter(|r| r.split == "calibration")
        .collect();
    if synth_records.is_empty() || cot_records.is_empty() {
        return Err(Error::DegenerateData(
            "need calibration-split records in both results files (run bench with --split calibration)"
                .into(),
        ));
    }
    let pairs = decisive_pairs(&synth_records, &cot_records);
    if pairs.is_empty() {
        return Err(Error::DegenerateData(
            "no decisive instances with criteria scores; run bench with --score-criteria".into(),
        ));
    }
    let (flat, grouped) = build_switch_training(&pairs);
    let model = switch::train_switch(&flat)?;
    model.save(out)?;
    println!(
        "trained on {} decisive instances ({} tasks); converged: {}",
        flat.len(),
        grouped.len(),
        model.training_meta.converged
    );
    println!(
        "training accuracy: {:.3}",
        switch::training_accuracy(&model, &flat)
    );
    println!("model written to {}", out.display());
    if let Some(path) = calibration_csv {
        let predictions: Vec<(f64, bool)> = flat
            .iter()
            .map(|(v, label)| (switch::decide(&model, v).0, *label))
            .collect();
        let table = switch::calibration_curve(&predictions, bins)?;
        std::fs::write(path, switch::calibration_csv(&table))?;
        println!("calibration table written to {}", path.display());
    }
    if lodo {
        let folds = switch::lodo_eval(&grouped)?;
        println!("{:<24} {:>8} {:>10}", "held-out task", "n", "accuracy");
        for fold in folds {
            match fold.accuracy {
                Some(acc) => println!("{:<24} {:>8} {:>10.3}", fold.task, fold.held_out_count, acc),
                None => println!(
                    "{:<24} {:>8} {:>10}",
                    fold.task,
                    fold.held_out_count,
                    fold.error.as_deref().unwrap_or("failed")
                ),
            }
        }
    }
    Ok(())
}

fn cmd_analyze(
    cfg: &EngineConfig,
    input: &Path,
    symbols: Option<&Path>,
    kind: &str,
) -> Result<(), Error> {
    if input.extension().is_some_and(|ext| ext == "jsonl") {
        let records = bench::read_records(input)?;
        let report = bench::build_report(&records)?;
        println!(
            "issue-category rates over {} code attempts:",
            report.code_attempts
        );
        for (category, rate) in &report.per_category_issue_rates {
            println!("  {category:<14} {rate:.3}");
        }
        return Ok(());
    }

    let source = std::fs::read_to_string(input)?;
    let program = ProgramArtifact::new(source, 0);
    let analyzer = AnalyzerConfig {
        media_deny_list: cfg.analyzer.media_deny_list.clone(),
    };
    let issues = match symbols {
        Some(symbols_path) => {
            let spec = symsolve::answer::AnswerSpec {
                kind: match kind {
                    "free_text" => AnswerKind::FreeText,
                    "integer" => AnswerKind::Integer,
                    "decimal" => AnswerKind::Decimal,
                    "boolean" => AnswerKind::Boolean,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown answer kind '{other}' for --kind"
                        )))
                    }
                },
                options: None,
                numeric_rel_tol: 1e-6,
            };
            let store = SymbolStore::from_json(&std::fs::read_to_string(symbols_path)?)?;
            let sandbox = Sandbox::new(&cfg.sandbox.interpreter, cfg.sandbox.max_concurrent);
            let run = sandbox.execute(&program, &store, &cfg.limits.to_exec_limits());
            evaluator::analyze(&program, &run, &spec, &analyzer)
        }
        None => evaluator::analyze_static(&program, &analyzer),
    };
    println!("{}", serde_json::to_string_pretty(&issues)?);
    Ok(())
}

fn cmd_split(
    cfg: &EngineConfig,
    dataset_path: &Path,
    fraction: Option<f64>,
    out: Option<&Path>,
) -> Result<(), Error> {
    let mut dataset = bench::load_dataset(dataset_path)?;
    let fraction = fraction.unwrap_or(cfg.bench.calibration_fraction);
    bench::split_calibration(&mut dataset, fraction, cfg.bench.seed)?;
    let mut lines = String::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for instance in &dataset.instances {
        let split = match instance.split_tag {
            symsolve::instance::SplitTag::Calibration => "calibration",
            symsolve::instance::SplitTag::Evaluation => "evaluation",
            symsolve::instance::SplitTag::Unassigned => "unassigned",
        };
        *counts.entry(split).or_insert(0) += 1;
        lines.push_str(&format!(
            "{}\n",
            serde_json::json!({"id": instance.id, "task": instance.task_name, "split": split})
        ));
    }
    match out {
        Some(path) => {
            std::fs::write(path, &lines)?;
            println!("split table written to {}", path.display());
        }
        None => print!("{lines}"),
    }
    for (split, count) in counts {
        println!("{split}: {count}");
    }
    Ok(())
}

fn cmd_report(
    cfg: &EngineConfig,
    results: &Path,
    json: Option<&Path>,
    csv: Option<&Path>,
    cost: bool,
) -> Result<(), Error> {
    let records = bench::read_records(results)?;
    let report = bench::build_report(&records)?;
    print!("{}", report.render_text());
    if let Some(path) = json {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
        println!("report written to {}", path.display());
    }
    if let Some(path) = csv {
        std::fs::write(path, report.accuracy_csv())?;
        println!("csv written to {}", path.display());
    }
    if cost {
        let cost_report = bench::cost_report(&records, &cfg.prices);
        print!("{}", cost_report.render_text());
    }
    Ok(())
}
