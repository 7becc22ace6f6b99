//! Acceptance suite: the offline, exact-arithmetic checks that gate the
//! engine. Each test prints one PASS line (visible with `--nocapture`);
//! a failing assertion is the corresponding FAIL.
//!
//! Everything here runs without network access: model calls go through
//! scripted or rule-based mock transports and the record/replay cache.

use std::collections::BTreeMap;
use std::sync::Arc;

use symsolve::answer::AnswerSpec;
use symsolve::bench::{
    self, run_benchmark, BenchConfig, BenchMethod, Dataset, RunRecord, SplitFilter, SwitchMode,
};
use symsolve::evaluator::{self, AnalyzerConfig, IssueCategory};
use symsolve::instance::ReasoningInstance;
use symsolve::program::ProgramArtifact;
use symsolve::prompts;
use symsolve::provider::mock::{RuleTransport, ScriptedTransport};
use symsolve::provider::{estimate_cost, CacheMode, PriceSheet, Provider, ReplayCache, TokenUsage};
use symsolve::sandbox::{ExecLimits, RunOutcome, RunStatus, Sandbox};
use symsolve::stats::{harmonic_mean_shifted, REPORT_HM_SHIFT};
use symsolve::switch::{self, AlgoVerdict, CriteriaVector, Decision};
use symsolve::symbols::SymbolStore;
use symsolve::synthesis::{self, LoopConfig};
use symsolve::trace::TraceAction;
use symsolve::util::SplitMix64;

fn sandbox_or_skip() -> Sandbox {
    let sandbox = Sandbox::default();
    assert!(
        sandbox.is_available(),
        "guest interpreter 'python3' is required for the acceptance suite"
    );
    sandbox
}

// ── criterion 1: harmonic-mean reproduction ────────────────────────────

// Per-task accuracy columns transcribed from the published per-model
// result tables (30 tasks each). Column order matches EXPECTED_* below.

#[rustfmt::skip]
const REFERENCE_TABLE_A: [(&str, [f64; 4]); 30] = [
    // (task, [cot, pot, interpreter-tool, routed-synthesis])
    ("shuffled_objects",     [0.094, 0.025, 0.537, 0.188]),
    ("buggy_tables",         [0.019, 0.100, 0.031, 0.188]),
    ("time_arithmetic",      [0.438, 0.331, 0.312, 0.475]),
    ("temporal_sequence",    [0.006, 0.006, 0.006, 0.094]),
    ("multistep_arithmetic", [0.144, 0.037, 0.087, 0.119]),
    ("dyck_languages",       [0.119, 0.081, 0.106, 0.050]),
    ("boolean_expressions",  [0.294, 0.219, 0.325, 0.456]),
    ("object_counting",      [0.144, 0.119, 0.181, 0.281]),
    ("omnimath_1",           [0.850, 0.838, 0.844, 0.869]),
    ("word_sorting",         [0.287, 0.525, 0.338, 0.556]),
    ("object_properties",    [0.006, 0.062, 0.125, 0.163]),
    ("spatial_reasoning",    [0.231, 0.237, 0.219, 0.231]),
    ("clevr",                [0.637, 0.619, 0.669, 0.688]),
    ("causal_understanding", [0.537, 0.438, 0.544, 0.537]),
    ("clutrr",               [0.556, 0.588, 0.662, 0.506]),
    ("linguini",             [0.144, 0.113, 0.119, 0.125]),
    ("boardgame_qa",         [0.463, 0.419, 0.394, 0.463]),
    ("zebra_puzzles",        [0.300, 0.256, 0.131, 0.275]),
    ("geometric_shapes",     [0.312, 0.269, 0.388, 0.300]),
    ("sportqa",              [0.200, 0.244, 0.269, 0.194]),
    ("hyperbaton",           [0.031, 0.019, 0.031, 0.025]),
    ("web_of_lies",          [0.219, 0.206, 0.188, 0.219]),
    ("movie_recommendation", [0.581, 0.562, 0.556, 0.569]),
    ("disambiguation_qa",    [0.448, 0.417, 0.479, 0.448]),
    ("leaf",                 [0.602, 0.636, 0.102, 0.602]),
    ("sarc_triples",         [0.375, 0.369, 0.344, 0.375]),
    ("nycc",                 [0.106, 0.131, 0.113, 0.106]),
    ("omnimath_2",           [0.544, 0.463, 0.544, 0.544]),
    ("omnimath_3",           [0.269, 0.194, 0.275, 0.269]),
    ("omnimath_4",           [0.312, 0.244, 0.319, 0.312]),
];
const EXPECTED_HM_A: [f64; 4] = [0.107, 0.115, 0.134, 0.201];

#[rustfmt::skip]
const REFERENCE_TABLE_B: [(&str, [f64; 3]); 30] = [
    // (task, [cot, pot, routed-synthesis])
    ("time_arithmetic",      [0.588, 0.706, 0.463]),
    ("buggy_tables",         [0.075, 0.481, 0.406]),
    ("multistep_arithmetic", [0.275, 0.394, 0.494]),
    ("dyck_languages",       [0.150, 0.175, 0.506]),
    ("shuffled_objects",     [0.119, 0.256, 0.294]),
    ("omnimath_1",           [0.894, 0.875, 0.875]),
    ("word_sorting",         [0.681, 0.600, 0.656]),
    ("object_counting",      [0.263, 0.331, 0.287]),
    ("temporal_sequence",    [0.250, 0.356, 0.275]),
    ("boolean_expressions",  [0.294, 0.356, 0.469]),
    ("spatial_reasoning",    [0.181, 0.394, 0.362]),
    ("object_properties",    [0.025, 0.237, 0.175]),
    ("omnimath_2",           [0.569, 0.569, 0.556]),
    ("web_of_lies",          [0.362, 0.300, 0.219]),
    ("clevr",                [0.719, 0.669, 0.700]),
    ("zebra_puzzles",        [0.194, 0.150, 0.188]),
    ("clutrr",               [0.662, 0.562, 0.613]),
    ("omnimath_3",           [0.338, 0.244, 0.325]),
    ("geometric_shapes",     [0.344, 0.294, 0.319]),
    ("boardgame_qa",         [0.512, 0.500, 0.519]),
    ("omnimath_4",           [0.463, 0.312, 0.431]),
    ("sportqa",              [0.169, 0.244, 0.200]),
    ("hyperbaton",           [0.087, 0.062, 0.075]),
    ("causal_understanding", [0.562, 0.562, 0.550]),
    ("linguini",             [0.094, 0.144, 0.094]),
    ("movie_recommendation", [0.606, 0.475, 0.594]),
    ("leaf",                 [0.341, 0.409, 0.341]),
    ("disambiguation_qa",    [0.552, 0.500, 0.552]),
    ("sarc_triples",         [0.287, 0.331, 0.287]),
    ("nycc",                 [0.188, 0.150, 0.188]),
];
const EXPECTED_HM_B: [f64; 3] = [0.211, 0.297, 0.305];

#[rustfmt::skip]
const REFERENCE_TABLE_C: [(&str, [f64; 3]); 30] = [
    // (task, [cot, pot, routed-synthesis])
    ("buggy_tables",         [0.275, 0.512, 0.594]),
    ("temporal_sequence",    [0.325, 0.306, 0.519]),
    ("dyck_languages",       [0.650, 0.637, 0.606]),
    ("multistep_arithmetic", [0.281, 0.600, 0.631]),
    ("time_arithmetic",      [0.875, 0.900, 0.894]),
    ("shuffled_objects",     [0.081, 0.150, 0.344]),
    ("web_of_lies",          [0.388, 0.344, 0.525]),
    ("object_counting",      [0.850, 0.812, 0.900]),
    ("zebra_puzzles",        [0.150, 0.100, 0.231]),
    ("object_properties",    [0.144, 0.219, 0.344]),
    ("boolean_expressions",  [0.550, 0.469, 0.419]),
    ("spatial_reasoning",    [0.463, 0.506, 0.550]),
    ("word_sorting",         [0.806, 0.775, 0.806]),
    ("omnimath_2",           [0.812, 0.706, 0.787]),
    ("movie_recommendation", [0.819, 0.744, 0.731]),
    ("omnimath_1",           [0.925, 0.925, 0.944]),
    ("boardgame_qa",         [0.688, 0.637, 0.675]),
    ("hyperbaton",           [0.206, 0.194, 0.188]),
    ("omnimath_3",           [0.556, 0.356, 0.544]),
    ("omnimath_4",           [0.662, 0.419, 0.644]),
    ("clutrr",               [0.762, 0.800, 0.762]),
    ("sportqa",              [0.287, 0.256, 0.287]),
    ("linguini",             [0.138, 0.175, 0.138]),
    ("clevr",                [0.769, 0.750, 0.769]),
    ("causal_understanding", [0.581, 0.550, 0.581]),
    ("leaf",                 [0.364, 0.455, 0.364]),
    ("geometric_shapes",     [0.056, 0.119, 0.087]),
    ("disambiguation_qa",    [0.562, 0.573, 0.562]),
    ("sarc_triples",         [0.338, 0.300, 0.338]),
    ("nycc",                 [0.231, 0.150, 0.231]),
];
const EXPECTED_HM_C: [f64; 3] = [0.304, 0.340, 0.397];

fn check_hm_table<const N: usize>(name: &str, rows: &[(&str, [f64; N])], expected: &[f64; N]) {
    assert_eq!(rows.len(), 30, "{name}: expected 30 tasks");
    for column in 0..N {
        let values: Vec<f64> = rows.iter().map(|(_, cols)| cols[column]).collect();
        let hm = harmonic_mean_shifted(&values, REPORT_HM_SHIFT).expect("non-empty column");
        assert!(
            (hm - expected[column]).abs() <= 0.001,
            "{name} column {column}: harmonic mean {hm:.4} vs published {:.3}",
            expected[column]
        );
    }
}

#[test]
fn criterion_1_harmonic_mean_reproduction() {
    check_hm_table("reference table A", &REFERENCE_TABLE_A, &EXPECTED_HM_A);
    check_hm_table("reference table B", &REFERENCE_TABLE_B, &EXPECTED_HM_B);
    check_hm_table("reference table C", &REFERENCE_TABLE_C, &EXPECTED_HM_C);
    println!(
        "[PASS] criterion 1: all 10 published harmonic-mean row values reproduced within ±0.001"
    );
}

// ── criterion 2: reference program oracle ───────────────────────────────

#[derive(serde::Deserialize)]
struct ManifestFlags {
    syntax_error: bool,
    trivial: bool,
    placeholder: bool,
    example_usage: bool,
    wrong_return_type: bool,
    returns_null: bool,
    raw_media_processing: bool,
}

#[derive(serde::Deserialize)]
struct ManifestEntry {
    file: String,
    kind: String,
    symbols: serde_json::Value,
    run_status: String,
    #[serde(default)]
    expected_return: Option<serde_json::Value>,
    flags: ManifestFlags,
    category: Option<String>,
    well_formed: bool,
    non_trivial: bool,
}

fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn load_manifest() -> Vec<ManifestEntry> {
    let text = std::fs::read_to_string(corpus_dir().join("manifest.json")).expect("manifest");
    serde_json::from_str(&text).expect("manifest parses")
}

fn spec_for(kind: &str) -> AnswerSpec {
    match kind {
        "integer" => AnswerSpec::integer(),
        "decimal" => AnswerSpec::decimal(),
        "boolean" => AnswerSpec::boolean(),
        _ => AnswerSpec::free_text(),
    }
}

fn run_corpus_entry(sandbox: &Sandbox, entry: &ManifestEntry) -> (ProgramArtifact, RunOutcome) {
    let source = std::fs::read_to_string(corpus_dir().join(&entry.file)).expect("corpus file");
    let program = ProgramArtifact::new(source, 0);
    let symbols = SymbolStore::new(entry.symbols.clone());
    let run = sandbox.execute(&program, &symbols, &ExecLimits::default());
    (program, run)
}

#[test]
fn criterion_2_reference_program_oracle() {
    let sandbox = sandbox_or_skip();
    let manifest = load_manifest();
    let config = AnalyzerConfig::default();

    for (file, expected) in [
        ("objects_count.py", serde_json::json!(1)),
        ("objects_color.py", serde_json::json!("brown")),
    ] {
        let entry = manifest
            .iter()
            .find(|e| e.file == file)
            .expect("reference listing in manifest");
        let (program, run) = run_corpus_entry(&sandbox, entry);
        assert_eq!(run.status, RunStatus::Ok, "{file}: {}", run.exception_text);
        assert_eq!(run.return_value, Some(expected), "{file} return value");
        let issues = evaluator::analyze(&program, &run, &spec_for(&entry.kind), &config);
        assert!(
            evaluator::is_well_formed(&issues, &run),
            "{file} should be well-formed: {issues:?}"
        );
        assert!(
            evaluator::is_non_trivial(&issues, &run),
            "{file} should be non-trivial"
        );
    }
    println!("[PASS] criterion 2: reference listings return 1 and \"brown\", well-formed and non-trivial");
}

// ── criterion 3: analyzer corpus ───────────────────────────────────────

#[test]
fn criterion_3_analyzer_corpus() {
    let sandbox = sandbox_or_skip();
    let manifest = load_manifest();
    assert_eq!(manifest.len(), 20, "corpus holds 20 hand-labeled programs");
    let config = AnalyzerConfig::default();

    let mut categories_seen = std::collections::BTreeSet::new();
    for entry in &manifest {
        let (program, run) = run_corpus_entry(&sandbox, entry);
        let status_name = match run.status {
            RunStatus::Ok => "ok",
            RunStatus::Exception => "exception",
            RunStatus::Timeout => "timeout",
            RunStatus::ResourceExhausted => "resource_exhausted",
            RunStatus::HarnessError => "harness_error",
        };
        assert_eq!(
            status_name, entry.run_status,
            "{}: run status ({})",
            entry.file, run.exception_text
        );
        if let Some(expected) = &entry.expected_return {
            assert_eq!(
                run.return_value.as_ref(),
                Some(expected),
                "{}: return value",
                entry.file
            );
        }

        let spec = spec_for(&entry.kind);
        let issues = evaluator::analyze(&program, &run, &spec, &config);
        let f = &entry.flags;
        let pairs = [
            ("syntax_error", issues.syntax_error, f.syntax_error),
            ("trivial", issues.trivial, f.trivial),
            ("placeholder", issues.placeholder, f.placeholder),
            ("example_usage", issues.example_usage, f.example_usage),
            (
                "wrong_return_type",
                issues.wrong_return_type,
                f.wrong_return_type,
            ),
            ("returns_null", issues.returns_null, f.returns_null),
            (
                "raw_media_processing",
                issues.raw_media_processing,
                f.raw_media_processing,
            ),
        ];
        for (flag, got, want) in pairs {
            assert_eq!(got, want, "{}: flag {flag}", entry.file);
        }

        let got_category = issues.primary_category().map(|c| c.as_str().to_string());
        assert_eq!(got_category, entry.category, "{}: category", entry.file);
        if let Some(category) = &entry.category {
            categories_seen.insert(category.clone());
        }

        assert_eq!(
            evaluator::is_well_formed(&issues, &run),
            entry.well_formed,
            "{}: well_formed",
            entry.file
        );
        assert_eq!(
            evaluator::is_non_trivial(&issues, &run),
            entry.non_trivial,
            "{}: non_trivial",
            entry.file
        );
    }
    for category in IssueCategory::ALL {
        assert!(
            categories_seen.contains(category.as_str()),
            "corpus must cover category {}",
            category.as_str()
        );
    }
    println!(
        "[PASS] criterion 3: 20/20 corpus programs agree with the manifest across all four categories; zero trivial false positives"
    );
}

// ── criterion 4: synthesis loop control flow ───────────────────────────

fn loop_instance() -> ReasoningInstance {
    ReasoningInstance::text_only(
        "loop-1",
        "toy",
        "What is a plus b for a=1, b=2?",
        AnswerSpec::integer(),
    )
}

const GEN_TRIVIAL: &str = concat!(
    "Extracting the two addends first.\n",
    "```json\n{\"a\": 1, \"b\": 2}\n```\n",
    "```python\ndef solve(symbols):\n    return 3\n```\n",
);
const REFINE_FIXED: &str = concat!(
    "Computing from the symbols instead of hard-coding.\n",
    "```python\ndef solve(symbols):\n    return symbols[\"a\"] + symbols[\"b\"]\n```\n",
);

#[test]
fn criterion_4_loop_control_flow() {
    let sandbox = sandbox_or_skip();
    let cfg = |k: u32| LoopConfig {
        max_iterations: k,
        model_id: "mock".into(),
        ..Default::default()
    };

    // (a) FINISHED on the second refinement: exactly 2 refinement
    // iterations, answer from the fixed program.
    let transport = Arc::new(ScriptedTransport::texts(&[
        GEN_TRIVIAL,
        "Code issues:\n- The answer is hard-coded.\n",
        REFINE_FIXED,
        "No issues.",
        "FINISHED",
    ]));
    let provider = Provider::new(transport.clone());
    let result = synthesis::run_loop(&provider, &sandbox, &loop_instance(), &cfg(30));
    assert_eq!(result.trace.len(), 2, "warnings: {:?}", result.warnings);
    assert_eq!(result.trace[1].action, TraceAction::Finished);
    assert_eq!(result.answer_text(), Some("3"));
    assert!(result.non_trivial && result.well_formed);
    assert_eq!(
        transport.remaining(),
        0,
        "exactly 2 refinement calls consumed"
    );

    // (b) never FINISHED with k = 5: exactly 5 refinement iterations, the
    // last trace exhausted, fallback answer from the last program.
    let mut script = vec![GEN_TRIVIAL.to_string()];
    for i in 0..5 {
        script.push("Code issues:\n- Still hard-coded.\n".to_string());
        script.push(format!(
            "```python\ndef solve(symbols):\n    return {i} + 10\n```\n"
        ));
    }
    let refs: Vec<&str> = script.iter().map(String::as_str).collect();
    let transport = Arc::new(ScriptedTransport::texts(&refs));
    let provider = Provider::new(transport.clone());
    let result = synthesis::run_loop(&provider, &sandbox, &loop_instance(), &cfg(5));
    assert_eq!(result.trace.len(), 6);
    assert_eq!(result.trace.last().unwrap().action, TraceAction::Exhausted);
    assert_eq!(
        result.answer_text(),
        Some("14"),
        "last program returns 4 + 10"
    );
    assert_eq!(
        transport.calls(),
        11,
        "1 generation + 5 judge + 5 refinement"
    );

    // (c) feedback without symbol issues: symbols byte-identical across
    // every trace.
    let transport = Arc::new(ScriptedTransport::texts(&[
        GEN_TRIVIAL,
        "Code issues:\n- Hard-coded.\n",
        REFINE_FIXED,
        "No issues.",
        "FINISHED",
    ]));
    let provider = Provider::new(transport);
    let result = synthesis::run_loop(&provider, &sandbox, &loop_instance(), &cfg(30));
    assert!(result
        .trace
        .iter()
        .all(|t| t.feedback.symbol_issues.is_empty()));
    let bytes: Vec<Vec<u8>> = result
        .trace
        .iter()
        .map(|t| t.symbols.canonical_bytes())
        .collect();
    assert!(
        bytes.windows(2).all(|w| w[0] == w[1]),
        "symbols must stay byte-identical"
    );
    println!("[PASS] criterion 4: loop pass/exhaustion/symbol-stability control flow verified");
}

// ── criterion 5: switch suite ──────────────────────────────────────────

fn single_feature(x: f64) -> CriteriaVector {
    let mut scores = [0.0; 10];
    scores[0] = x;
    CriteriaVector::new(scores)
}

#[test]
fn criterion_5_switch_suite() {
    // Separable synthetic set: ≥ 0.99 training accuracy.
    let mut rng = SplitMix64::new(5);
    let separable: Vec<(CriteriaVector, bool)> = (0..400)
        .map(|_| {
            let mut scores = [0.0f64; 10];
            for s in scores.iter_mut() {
                *s = rng.next_f64();
            }
            let label = scores[9] > 0.5;
            (CriteriaVector::new(scores), label)
        })
        .collect();
    let model = switch::train_switch(&separable).expect("trains");
    let accuracy = switch::training_accuracy(&model, &separable);
    assert!(accuracy >= 0.99, "separable accuracy {accuracy}");

    // Label flip negates parameters within 1e-6.
    let base: Vec<(CriteriaVector, bool)> = vec![
        (single_feature(0.1), false),
        (single_feature(0.45), true),
        (single_feature(0.55), false),
        (single_feature(0.9), true),
        (CriteriaVector::new([0.2; 10]), false),
        (CriteriaVector::new([0.8; 10]), true),
    ];
    let flipped: Vec<(CriteriaVector, bool)> = base.iter().map(|(v, y)| (v.clone(), !*y)).collect();
    let a = switch::train_switch(&base).expect("trains");
    let b = switch::train_switch(&flipped).expect("trains");
    for i in 0..10 {
        assert!((a.weights[i] + b.weights[i]).abs() < 1e-6, "weight {i}");
    }
    assert!((a.bias + b.bias).abs() < 1e-6, "bias");

    // Grid-search oracle agreement within 0.02 on the 4-point fixture.
    let points = [(0.1, false), (0.4, true), (0.6, false), (0.9, true)];
    let samples: Vec<(CriteriaVector, bool)> = points
        .iter()
        .map(|(x, y)| (single_feature(*x), *y))
        .collect();
    let fitted = switch::train_switch(&samples).expect("trains");
    let softplus = |x: f64| x.max(0.0) + (-x.abs()).exp().ln_1p();
    let objective = |w: f64, b: f64| {
        points
            .iter()
            .map(|(x, y)| {
                let z = w * x + b;
                if *y {
                    softplus(-z)
                } else {
                    softplus(z)
                }
            })
            .sum::<f64>()
            + 0.5 * 1e-4 * w * w
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for wi in 0..=1000 {
        let w = -5.0 + wi as f64 * 0.01;
        for bi in 0..=1000 {
            let b = -5.0 + bi as f64 * 0.01;
            let value = objective(w, b);
            if value < best.0 {
                best = (value, w, b);
            }
        }
    }
    assert!(
        (fitted.weights[0] - best.1).abs() <= 0.02,
        "trained weight {} vs grid {}",
        fitted.weights[0],
        best.1
    );
    assert!(
        (fitted.bias - best.2).abs() <= 0.02,
        "trained bias {} vs grid {}",
        fitted.bias,
        best.2
    );

    // Perfectly calibrated generator: max bin deviation < 0.05 at 1e4
    // samples, 10 bins.
    let mut rng = SplitMix64::new(99);
    let predictions: Vec<(f64, bool)> = (0..10_000)
        .map(|_| {
            let p = rng.next_f64();
            (p, rng.next_f64() < p)
        })
        .collect();
    let bins = switch::calibration_curve(&predictions, 10).expect("bins");
    for bin in &bins {
        assert!(
            (bin.bin_mid - bin.empirical_rate).abs() < 0.05,
            "bin {} deviates: rate {}",
            bin.bin_mid,
            bin.empirical_rate
        );
    }

    // zero_shot_decide ≡ threshold(p10, 0.5) over 1,000 random vectors.
    let mut rng = SplitMix64::new(7);
    for _ in 0..1000 {
        let mut scores = [0.0f64; 10];
        for s in scores.iter_mut() {
            *s = rng.next_f64();
        }
        let vector = CriteriaVector::new(scores);
        let expected = if scores[9] >= 0.5 {
            Decision::Synthesis
        } else {
            Decision::Cot
        };
        assert_eq!(switch::zero_shot_decide(&vector), expected);
    }

    // The ≥ 8-of-10 rule, exhaustively over all 1,024 bit vectors and both
    // possible model verdicts.
    for mask in 0u32..1024 {
        let mut bits = [false; 10];
        for (i, bit) in bits.iter_mut().enumerate() {
            *bit = (mask >> i) & 1 == 1;
        }
        let ones = mask.count_ones() as usize;
        for final_verdict in [false, true] {
            let verdict = AlgoVerdict::from_bits(bits, final_verdict);
            assert_eq!(
                verdict.consistent_with_rule,
                final_verdict == (ones >= 8),
                "mask {mask:#b} final {final_verdict}"
            );
        }
    }
    println!("[PASS] criterion 5: trainer, symmetry, grid oracle, calibration, zero-shot, and 8-of-10 rule verified");
}

// ── criterion 6: determinism and resumability ──────────────────────────

fn fixture_dataset() -> Dataset {
    let mut instances = Vec::new();
    for i in 0..10 {
        let task = if i < 5 { "alpha" } else { "beta" };
        let question = format!("Fixture {i}: compute {i} plus {}.", i + 1);
        let mut instance =
            ReasoningInstance::text_only(format!("fx-{i}"), task, question, AnswerSpec::integer());
        instance.gold_answer = Some(
            symsolve::answer::normalize_answer(
                &serde_json::json!(2 * i + 1),
                &instance.answer_spec,
            )
            .expect("gold"),
        );
        instances.push(instance);
    }
    Dataset {
        name: "fixture".into(),
        instances,
        source_path: "fixture.jsonl".into(),
    }
}

fn fixture_transport() -> RuleTransport {
    let mut rules = Vec::new();
    for i in 0..10u32 {
        let needle = format!("Fixture {i}:");
        let reply = match i {
            3 => "no code this time, the answer is nine".to_string(),
            7 => "```python\ndef solve():\n    raise ValueError(\"broken fixture\")\n```".to_string(),
            4 => format!("```python\ndef solve():\n    return {}\n```", 2 * i + 2), // wrong answer
            _ => format!(
                "```python\ndef solve():\n    total = 0\n    for v in [{i}, {}]:\n        total += v\n    return total\n```",
                i + 1
            ),
        };
        rules.push((needle, reply));
    }
    RuleTransport::new(rules)
}

fn bench_cfg() -> BenchConfig {
    BenchConfig {
        method: BenchMethod::Pot,
        switch_mode: SwitchMode::ZeroShot,
        concurrency: 8,
        split: SplitFilter::All,
        ..Default::default()
    }
}

#[test]
fn criterion_6_determinism_and_resume() {
    let _sandbox = sandbox_or_skip();
    let dir = tempfile::tempdir().expect("tempdir");
    let cache = ReplayCache::open(dir.path().join("cache")).expect("cache");
    let datasets = [fixture_dataset()];
    let sandbox = Sandbox::default();

    // Seed the cache with a record-mode run against the rule transport.
    let provider =
        Provider::new(Arc::new(fixture_transport())).with_cache(cache.clone(), CacheMode::Record);
    let seeded = run_benchmark(
        &provider,
        &sandbox,
        &datasets,
        &bench_cfg(),
        dir.path().join("seed.jsonl"),
        false,
    )
    .expect("seed run");
    assert_eq!(seeded.len(), 10);
    assert_eq!(cache.len(), 10, "one cached response per instance");

    // Two replay-mode runs must produce byte-identical results files.
    for name in ["replay_a.jsonl", "replay_b.jsonl"] {
        let provider = Provider::replay_only(cache.clone());
        run_benchmark(
            &provider,
            &sandbox,
            &datasets,
            &bench_cfg(),
            dir.path().join(name),
            false,
        )
        .expect("replay run");
        assert_eq!(provider.transport_calls(), 0, "replay makes no live calls");
    }
    let bytes_a = std::fs::read(dir.path().join("replay_a.jsonl")).expect("read a");
    let bytes_b = std::fs::read(dir.path().join("replay_b.jsonl")).expect("read b");
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b, "replay runs must be byte-identical");

    // Interrupt after 4 records, then resume: record-for-record equal to
    // the uninterrupted run.
    let text = String::from_utf8(bytes_a.clone()).expect("utf8");
    let prefix: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
    let resumed_path = dir.path().join("resumed.jsonl");
    std::fs::write(&resumed_path, prefix).expect("write prefix");
    let provider = Provider::replay_only(cache.clone());
    let mut cfg = bench_cfg();
    cfg.resume = true;
    let written = run_benchmark(&provider, &sandbox, &datasets, &cfg, &resumed_path, false)
        .expect("resumed run");
    assert_eq!(written.len(), 6, "resume only produces the missing records");
    let resumed_bytes = std::fs::read(&resumed_path).expect("read resumed");
    assert_eq!(
        resumed_bytes, bytes_a,
        "resumed file matches uninterrupted run"
    );

    // Resuming a complete file does nothing.
    let provider = Provider::replay_only(cache);
    let written = run_benchmark(&provider, &sandbox, &datasets, &cfg, &resumed_path, false)
        .expect("no-op resume");
    assert!(written.is_empty());
    assert_eq!(provider.transport_calls(), 0);

    // Sanity on content: correct/incorrect mix as constructed.
    let records = bench::read_records(dir.path().join("replay_a.jsonl")).expect("records");
    let correct = records.iter().filter(|r| r.correct == Some(true)).count();
    assert_eq!(
        correct, 7,
        "fixtures 3 (no code), 4 (wrong answer), 7 (raises) are incorrect"
    );
    println!(
        "[PASS] criterion 6: replay runs byte-identical; interrupt+resume equals uninterrupted"
    );
}

// ── criterion 7: cost accounting ───────────────────────────────────────

#[test]
fn criterion_7_cost_accounting() {
    // 50-record fixture averaging exactly (1115.96, 1333.98) tokens.
    let total_input: u64 = 55_798; // 50 × 1115.96
    let total_output: u64 = 66_699; // 50 × 1333.98
    let mut records: Vec<RunRecord> = Vec::new();
    let mut in_left = total_input;
    let mut out_left = total_output;
    for i in 0..50 {
        let (input, output) = if i < 49 {
            (1116u64, 1334u64)
        } else {
            (in_left, out_left)
        };
        in_left -= input.min(in_left);
        out_left -= output.min(out_left);
        records.push(RunRecord {
            instance_id: format!("c{i}"),
            task: "cost".into(),
            method: "pot".into(),
            solve_method: "pot".into(),
            split: "evaluation".into(),
            final_answer: None,
            correct: None,
            well_formed: false,
            non_trivial: false,
            attempted_code: true,
            issues: Default::default(),
            switch: None,
            usage: TokenUsage::new(input, output),
            cost_usd: 0.0,
            warnings: Vec::new(),
            error: None,
            trace: None,
            wall_seconds: 0.0,
        });
    }
    assert_eq!(
        records.iter().map(|r| r.usage.input_tokens).sum::<u64>(),
        total_input
    );
    assert_eq!(
        records.iter().map(|r| r.usage.output_tokens).sum::<u64>(),
        total_output
    );

    let report = bench::cost_report(&records, &PriceSheet::default());
    let pot = &report.per_method["pot"];
    assert_eq!(pot.avg_input_tokens, 1115.96, "average input tokens exact");
    assert_eq!(
        pot.avg_output_tokens, 1333.98,
        "average output tokens exact"
    );

    // estimate_cost is linear in each token count.
    use proptest::prelude::*;
    let mut runner = proptest::test_runner::TestRunner::default();
    runner
        .run(
            &(
                0u64..1_000_000,
                0u64..1_000_000,
                0u64..1_000_000,
                0u64..1_000_000,
                0.0f64..10.0,
                0.0f64..10.0,
                1u64..20,
            ),
            |(a_in, a_out, b_in, b_out, p_in, p_out, k)| {
                let prices = PriceSheet {
                    usd_per_million_input: p_in,
                    usd_per_million_output: p_out,
                };
                let a = TokenUsage::new(a_in, a_out);
                let b = TokenUsage::new(b_in, b_out);
                let sum = TokenUsage::new(a_in + b_in, a_out + b_out);
                let additivity = (estimate_cost(sum, &prices)
                    - (estimate_cost(a, &prices) + estimate_cost(b, &prices)))
                .abs();
                prop_assert!(additivity < 1e-9, "additivity violated by {additivity}");
                let scaled = TokenUsage::new(a_in * k, a_out * k);
                let homogeneity =
                    (estimate_cost(scaled, &prices) - k as f64 * estimate_cost(a, &prices)).abs();
                prop_assert!(homogeneity < 1e-9, "homogeneity violated by {homogeneity}");
                Ok(())
            },
        )
        .expect("linearity property");
    println!(
        "[PASS] criterion 7: token-average fixture exact; estimate_cost linear in both counts"
    );
}

// ── criterion 8: prompt fidelity ───────────────────────────────────────

#[test]
fn criterion_8_prompt_fidelity() {
    const QUESTION: &str =
        "If Alice has 3 apples and Bob gives her 4 more, how many apples does Alice have?";

    let rendered = prompts::render(prompts::GENERATE_INITIAL, &[("question", QUESTION)]);
    assert_eq!(
        rendered,
        include_str!("golden/generate_initial.golden.txt"),
        "initial-generation prompt deviates from golden"
    );

    let rendered = prompts::render(prompts::SWITCH, &[("question", QUESTION)]);
    assert_eq!(
        rendered,
        include_str!("golden/switch.golden.txt"),
        "switch prompt deviates from golden"
    );

    let rendered = prompts::render(prompts::ALGORITHMICITY, &[("question", QUESTION)]);
    assert_eq!(
        rendered,
        include_str!("golden/algorithmicity.golden.txt"),
        "algorithmicity prompt deviates from golden"
    );

    let run = RunOutcome {
        status: RunStatus::Ok,
        return_value: Some(serde_json::json!(7)),
        stdout: String::new(),
        exception_text: String::new(),
        duration_seconds: 0.0,
    };
    let rendered =
        synthesis::render_refine_prompt(&run, "No issues found by the automatic checks.");
    assert_eq!(
        rendered,
        include_str!("golden/refine.golden.txt"),
        "refinement prompt deviates from golden"
    );

    let symbols = SymbolStore::new(serde_json::json!({"apples_alice": 3, "apples_given": 4}));
    let program = ProgramArtifact::new(
        "def solve(symbols):\n    return symbols[\"apples_alice\"] + symbols[\"apples_given\"]",
        0,
    );
    let rendered = evaluator::render_judge_prompt(&symbols, &program, &run);
    assert_eq!(
        rendered,
        include_str!("golden/judge.golden.txt"),
        "judge prompt deviates from golden"
    );
    println!(
        "[PASS] criterion 8: all five rendered prompts match their golden files byte-for-byte"
    );
}

// ── supporting check: switch training pipeline over records ────────────

#[test]
fn switch_training_pipeline_over_records() {
    // End-to-end shape check for the decisive-pair builder feeding the
    // trainer, as the train-switch command does.
    let mut rng = SplitMix64::new(31);
    let mut synth = Vec::new();
    let mut cot = Vec::new();
    for i in 0..60 {
        let task = if i % 2 == 0 { "alpha" } else { "beta" };
        let mut scores = [0.5f64; 10];
        scores[9] = rng.next_f64();
        let synth_correct = scores[9] > 0.5;
        let make = |method: &str, correct: bool, with_criteria: bool| RunRecord {
            instance_id: format!("i{i}"),
            task: task.into(),
            method: method.into(),
            solve_method: method.into(),
            split: "calibration".into(),
            final_answer: Some("x".into()),
            correct: Some(correct),
            well_formed: false,
            non_trivial: false,
            attempted_code: false,
            issues: Default::default(),
            switch: with_criteria.then(|| bench::SwitchInfo {
                criteria: CriteriaVector::new(scores),
                probability: None,
                decision: None,
            }),
            usage: TokenUsage::default(),
            cost_usd: 0.0,
            warnings: Vec::new(),
            error: None,
            trace: None,
            wall_seconds: 0.0,
        };
        synth.push(make("pips_no_switch", synth_correct, true));
        cot.push(make("cot", !synth_correct, false));
    }
    let pairs = bench::decisive_pairs(&synth, &cot);
    assert_eq!(pairs.len(), 60, "all instances are decisive here");
    let (flat, grouped) = bench::build_switch_training(&pairs);
    assert_eq!(grouped.len(), 2);
    let model = switch::train_switch(&flat).expect("trains");
    assert!(switch::training_accuracy(&model, &flat) > 0.95);
    let folds = switch::lodo_eval(&grouped).expect("folds");
    assert_eq!(folds.len(), 2);
    for fold in folds {
        assert!(fold.accuracy.expect("fold accuracy") > 0.9);
    }

    let mut by_task: BTreeMap<String, Vec<(CriteriaVector, bool)>> = BTreeMap::new();
    for (task, v, y) in &pairs {
        by_task
            .entry(task.clone())
            .or_default()
            .push((v.clone(), *y));
    }
    assert_eq!(by_task.len(), 2);
}
