//! The synthesis/chain-of-thought confidence switch.
//!
//! Before committing to a solving strategy, the model scores ten
//! self-reflection criteria for the instance, forming a vector in
//! `[0,1]^10`. Routing then happens one of two ways:
//!
//! - zero-shot: threshold the tenth criterion (overall comparative success)
//!   at 0.5, no training data needed;
//! - trained: a logistic classifier over all ten scores, fit on decisive
//!   calibration instances (those where exactly one of synthesis/CoT was
//!   correct; label true = synthesis solved it).
//!
//! Training is deterministic full-batch Newton descent on the
//! L2-regularized log-likelihood (strength 1e-4 on weights, none on bias),
//! run to gradient norm ≤ 1e-8 or 10,000 steps; identical inputs give
//! bitwise-identical models. The related algorithmicity classifier asks for
//! eleven binary verdicts and cross-checks the model's final bit against
//! the at-least-8-of-10 rule.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::instance_message;
use crate::instance::ReasoningInstance;
use crate::prompts;
use crate::provider::{Message, ModelRequest, Provider, TokenUsage};

pub const CRITERIA_COUNT: usize = 10;

/// The model's ten self-assessment scores for one instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriteriaVector {
    pub scores: [f64; CRITERIA_COUNT],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parse_warnings: Vec<String>,
}

impl CriteriaVector {
    pub fn new(scores: [f64; CRITERIA_COUNT]) -> Self {
        Self {
            scores,
            parse_warnings: Vec::new(),
        }
    }

    /// Neutral fallback when scoring failed outright.
    pub fn neutral(warning: impl Into<String>) -> Self {
        Self {
            scores: [0.5; CRITERIA_COUNT],
            parse_warnings: vec![warning.into()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Synthesis,
    Cot,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::Synthesis => "synthesis",
            Decision::Cot => "cot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub sample_count: usize,
    pub l2_strength: f64,
    pub converged: bool,
}

/// Logistic routing model over the criteria vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: [f64; CRITERIA_COUNT],
    pub bias: f64,
    pub threshold: f64,
    pub training_meta: TrainingMeta,
}

impl LogisticModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let body = serde_json::to_string_pretty(self)?;
        std::fs::write(path, body)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let model: LogisticModel = serde_json::from_str(&text)?;
        if !model.weights.iter().all(|w| w.is_finite()) || !model.bias.is_finite() {
            return Err(Error::Config("model parameters must be finite".into()));
        }
        Ok(model)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable ln(1 + exp(x)).
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

// ── criteria scoring ───────────────────────────────────────────────────

/// Text after the last FINAL ANSWER marker, when present.
fn final_answer_tail(text: &str) -> Option<&str> {
    crate::fenced::after_last_marker(text, "FINAL ANSWER")
        .map(|tail| tail.trim_start_matches([':', '*', ' ']).trim())
}

/// Parse a bracketed (or bare) list of exactly `expected` numbers.
fn parse_number_list(text: &str, expected: usize) -> std::result::Result<Vec<f64>, String> {
    let slice = match (text.find('['), text.find(']')) {
        (Some(open), Some(close)) if close > open => &text[open + 1..close],
        _ => text,
    };
    let numbers: Vec<f64> = slice
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|token| !token.is_empty())
        .map(|token| token.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format!("unparseable number in list: {e}"))?;
    if numbers.len() != expected {
        return Err(format!(
            "expected {expected} numbers, found {}",
            numbers.len()
        ));
    }
    Ok(numbers)
}

/// Score the ten switch criteria for an instance.
///
/// Malformed responses are re-prompted up to 2 times; persistent failure
/// degrades to a neutral all-0.5 vector with a recorded warning. Scores
/// outside [0,1] clamp with a warning. Returns the usage consumed.
pub fn score_criteria(
    provider: &Provider,
    model_id: &str,
    instance: &ReasoningInstance,
) -> Result<(CriteriaVector, TokenUsage)> {
    let rendered = prompts::render(
        prompts::SWITCH,
        &[("question", instance.query_text.as_str())],
    );
    let mut first = instance_message(instance)?;
    first.parts[0] = crate::provider::Part::Text(rendered);
    let mut transcript = vec![first];
    let mut usage = TokenUsage::default();
    let mut warnings: Vec<String> = Vec::new();

    for attempt in 0..3 {
        let response = provider.complete(&ModelRequest::new(model_id, transcript.clone()))?;
        usage.add(response.usage);
        let parsed = final_answer_tail(&response.text)
            .ok_or_else(|| "response has no FINAL ANSWER marker".to_string())
            .and_then(|tail| parse_number_list(tail, CRITERIA_COUNT));
        match parsed {
            Ok(numbers) => {
                let mut scores = [0.0f64; CRITERIA_COUNT];
                for (i, value) in numbers.into_iter().enumerate() {
                    if !(0.0..=1.0).contains(&value) {
                        warnings.push(format!(
                            "criterion {} score {} clamped to [0,1]",
                            i + 1,
                            value
                        ));
                    }
                    scores[i] = value.clamp(0.0, 1.0);
                }
                return Ok((
                    CriteriaVector {
                        scores,
                        parse_warnings: warnings,
                    },
                    usage,
                ));
            }
            Err(problem) => {
                warnings.push(format!("attempt {}: {problem}", attempt + 1));
                if attempt < 2 {
                    transcript.push(Message::assistant(response.text));
                    transcript.push(Message::user(prompts::REPROMPT_SWITCH.to_string()));
                }
            }
        }
    }
    let mut vector = CriteriaVector::neutral("criteria scoring failed; defaulted to 0.5");
    vector.parse_warnings.extend(warnings);
    Ok((vector, usage))
}

/// Zero-shot routing: synthesis iff the tenth criterion is at least 0.5.
pub fn zero_shot_decide(v: &CriteriaVector) -> Decision {
    if v.scores[CRITERIA_COUNT - 1] >= 0.5 {
        Decision::Synthesis
    } else {
        Decision::Cot
    }
}

// ── logistic training ──────────────────────────────────────────────────

const L2_STRENGTH: f64 = 1e-4;
const GRAD_TOL: f64 = 1e-8;
const MAX_STEPS: usize = 10_000;
const DIM: usize = CRITERIA_COUNT + 1; // weights + bias

/// Negative regularized log-likelihood and its gradient.
fn objective(params: &[f64; DIM], samples: &[([f64; CRITERIA_COUNT], bool)]) -> f64 {
    let mut loss = 0.0;
    for (x, y) in samples {
        let z = dot(params, x);
        loss += if *y { softplus(-z) } else { softplus(z) };
    }
    let penalty: f64 = params[..CRITERIA_COUNT].iter().map(|w| w * w).sum();
    loss + 0.5 * L2_STRENGTH * penalty
}

fn dot(params: &[f64; DIM], x: &[f64; CRITERIA_COUNT]) -> f64 {
    let mut z = params[CRITERIA_COUNT]; // bias
    for i in 0..CRITERIA_COUNT {
        z += params[i] * x[i];
    }
    z
}

fn gradient(params: &[f64; DIM], samples: &[([f64; CRITERIA_COUNT], bool)]) -> [f64; DIM] {
    let mut grad = [0.0f64; DIM];
    for (x, y) in samples {
        let p = sigmoid(dot(params, x));
        let residual = p - if *y { 1.0 } else { 0.0 };
        for i in 0..CRITERIA_COUNT {
            grad[i] += residual * x[i];
        }
        grad[CRITERIA_COUNT] += residual;
    }
    for i in 0..CRITERIA_COUNT {
        grad[i] += L2_STRENGTH * params[i];
    }
    grad
}

fn hessian(params: &[f64; DIM], samples: &[([f64; CRITERIA_COUNT], bool)]) -> [[f64; DIM]; DIM] {
    let mut h = [[0.0f64; DIM]; DIM];
    for (x, _) in samples {
        let p = sigmoid(dot(params, x));
        let weight = (p * (1.0 - p)).max(1e-12);
        let mut xt = [0.0f64; DIM];
        xt[..CRITERIA_COUNT].copy_from_slice(x);
        xt[CRITERIA_COUNT] = 1.0;
        for i in 0..DIM {
            for j in 0..DIM {
                h[i][j] += weight * xt[i] * xt[j];
            }
        }
    }
    for (i, row) in h.iter_mut().enumerate().take(CRITERIA_COUNT) {
        row[i] += L2_STRENGTH;
    }
    h
}

/// Solve H · d = g by Gaussian elimination with partial pivoting.
fn solve_linear(mut h: [[f64; DIM]; DIM], mut g: [f64; DIM]) -> Option<[f64; DIM]> {
    for col in 0..DIM {
        let mut pivot = col;
        for row in col + 1..DIM {
            if h[row][col].abs() > h[pivot][col].abs() {
                pivot = row;
            }
        }
        if h[pivot][col].abs() < 1e-300 {
            return None;
        }
        h.swap(col, pivot);
        g.swap(col, pivot);
        for row in col + 1..DIM {
            let factor = h[row][col] / h[col][col];
            for k in col..DIM {
                h[row][k] -= factor * h[col][k];
            }
            g[row] -= factor * g[col];
        }
    }
    let mut x = [0.0f64; DIM];
    for col in (0..DIM).rev() {
        let mut acc = g[col];
        for k in col + 1..DIM {
            acc -= h[col][k] * x[k];
        }
        x[col] = acc / h[col][col];
    }
    Some(x)
}

fn grad_norm(grad: &[f64; DIM]) -> f64 {
    grad.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Fit the logistic switch on decisive-instance samples
/// (label true = synthesis solved the instance, CoT did not).
///
/// Damped Newton descent: deterministic, full batch, no feature
/// standardization (scores already live in [0,1]).
pub fn train_switch(samples: &[(CriteriaVector, bool)]) -> Result<LogisticModel> {
    let positives = samples.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == samples.len() {
        return Err(Error::DegenerateData(format!(
            "need both labels: {positives} positive of {} samples",
            samples.len()
        )));
    }
    let data: Vec<([f64; CRITERIA_COUNT], bool)> =
        samples.iter().map(|(v, y)| (v.scores, *y)).collect();

    let mut params = [0.0f64; DIM];
    let mut converged = false;
    for _ in 0..MAX_STEPS {
        let grad = gradient(&params, &data);
        if grad_norm(&grad) <= GRAD_TOL {
            converged = true;
            break;
        }
        let h = hessian(&params, &data);
        let direction = match solve_linear(h, grad) {
            Some(d) => d,
            None => break,
        };
        // Backtracking line search keeps Newton monotone on hard data.
        let current = objective(&params, &data);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut candidate = params;
            for i in 0..DIM {
                candidate[i] -= step * direction[i];
            }
            if objective(&candidate, &data) <= current {
                params = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let mut weights = [0.0f64; CRITERIA_COUNT];
    weights.copy_from_slice(&params[..CRITERIA_COUNT]);
    Ok(LogisticModel {
        weights,
        bias: params[CRITERIA_COUNT],
        threshold: 0.5,
        training_meta: TrainingMeta {
            sample_count: samples.len(),
            l2_strength: L2_STRENGTH,
            converged,
        },
    })
}

/// Probability and routing decision for one criteria vector. The boundary
/// maps to synthesis.
pub fn decide(model: &LogisticModel, v: &CriteriaVector) -> (f64, Decision) {
    let mut z = model.bias;
    for i in 0..CRITERIA_COUNT {
        z += model.weights[i] * v.scores[i];
    }
    let probability = sigmoid(z);
    let decision = if probability >= model.threshold {
        Decision::Synthesis
    } else {
        Decision::Cot
    };
    (probability, decision)
}

// ── algorithmicity classifier ──────────────────────────────────────────

/// Eleven binary verdicts: ten criteria bits plus the model's final call,
/// checked against the at-least-8-of-10 rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgoVerdict {
    pub bits: [bool; CRITERIA_COUNT],
    pub final_verdict: bool,
    pub consistent_with_rule: bool,
}

impl AlgoVerdict {
    /// Build from the eleven parsed bits, computing rule consistency.
    pub fn from_bits(bits: [bool; CRITERIA_COUNT], final_verdict: bool) -> Self {
        let ones = bits.iter().filter(|b| **b).count();
        Self {
            bits,
            final_verdict,
            consistent_with_rule: final_verdict == (ones >= 8),
        }
    }
}

/// Last bracketed list in the text (models reason first, then answer).
fn last_bracketed(text: &str) -> Option<&str> {
    let close = text.rfind(']')?;
    let open = text[..close].rfind('[')?;
    Some(&text[open + 1..close])
}

/// Classify whether an instance is algorithmic.
pub fn classify_algorithmicity(
    provider: &Provider,
    model_id: &str,
    instance: &ReasoningInstance,
) -> Result<(AlgoVerdict, TokenUsage)> {
    let rendered = prompts::render(
        prompts::ALGORITHMICITY,
        &[("question", instance.query_text.as_str())],
    );
    let mut first = instance_message(instance)?;
    first.parts[0] = crate::provider::Part::Text(rendered);
    let mut transcript = vec![first];
    let mut usage = TokenUsage::default();
    let mut last_problem = String::new();

    for attempt in 0..3 {
        let response = provider.complete(&ModelRequest::new(model_id, transcript.clone()))?;
        usage.add(response.usage);
        let parsed = last_bracketed(&response.text)
            .ok_or_else(|| "no bracketed list in response".to_string())
            .and_then(|body| parse_number_list(body, CRITERIA_COUNT + 1));
        match parsed {
            Ok(values) if values.iter().all(|v| *v == 0.0 || *v == 1.0) => {
                let mut bits = [false; CRITERIA_COUNT];
                for i in 0..CRITERIA_COUNT {
                    bits[i] = values[i] == 1.0;
                }
                return Ok((
                    AlgoVerdict::from_bits(bits, values[CRITERIA_COUNT] == 1.0),
                    usage,
                ));
            }
            Ok(_) => last_problem = "list elements must be binary".to_string(),
            Err(problem) => last_problem = problem,
        }
        if attempt < 2 {
            transcript.push(Message::assistant(response.text));
            transcript.push(Message::user(prompts::REPROMPT_ALGORITHMICITY.to_string()));
        }
    }
    Err(Error::UnclassifiedInstance {
        id: instance.id.clone(),
        message: last_problem,
    })
}

// ── calibration & leave-one-dataset-out ────────────────────────────────

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationBin {
    pub bin_mid: f64,
    pub empirical_rate: f64,
    pub count: usize,
}

/// Equal-width reliability bins over [0,1]; only non-empty bins are
/// returned. Labels must come from decisive instances.
pub fn calibration_curve(
    predictions: &[(f64, bool)],
    n_bins: usize,
) -> Result<Vec<CalibrationBin>> {
    if predictions.is_empty() || n_bins == 0 {
        return Err(Error::EmptyInput(
            "calibration_curve needs predictions and bins",
        ));
    }
    let mut counts = vec![0usize; n_bins];
    let mut positives = vec![0usize; n_bins];
    for (p, label) in predictions {
        let idx = ((p * n_bins as f64).floor() as usize).min(n_bins - 1);
        counts[idx] += 1;
        if *label {
            positives[idx] += 1;
        }
    }
    Ok((0..n_bins)
        .filter(|i| counts[*i] > 0)
        .map(|i| CalibrationBin {
            bin_mid: (i as f64 + 0.5) / n_bins as f64,
            empirical_rate: positives[i] as f64 / counts[i] as f64,
            count: counts[i],
        })
        .collect())
}

/// Calibration bins as CSV for external plotting.
pub fn calibration_csv(bins: &[CalibrationBin]) -> String {
    let mut out = String::from("bin_mid,empirical_rate,count\n");
    for bin in bins {
        out.push_str(&format!(
            "{},{},{}\n",
            bin.bin_mid, bin.empirical_rate, bin.count
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LodoFold {
    pub task: String,
    pub held_out_count: usize,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

/// Leave-one-dataset-out: train on all tasks but one, score decision
/// accuracy on the held-out task; every task is held out exactly once.
pub fn lodo_eval(grouped: &BTreeMap<String, Vec<(CriteriaVector, bool)>>) -> Result<Vec<LodoFold>> {
    if grouped.len() < 2 {
        return Err(Error::DegenerateData(
            "leave-one-dataset-out needs at least two tasks".into(),
        ));
    }
    let mut folds = Vec::new();
    for held_out in grouped.keys() {
        let train: Vec<(CriteriaVector, bool)> = grouped
            .iter()
            .filter(|(task, _)| *task != held_out)
            .flat_map(|(_, samples)| samples.iter().cloned())
            .collect();
        let test = &grouped[held_out];
        match train_switch(&train) {
            Ok(model) => {
                let correct = test
                    .iter()
                    .filter(|(v, label)| {
                        let (_, decision) = decide(&model, v);
                        (decision == Decision::Synthesis) == *label
                    })
                    .count();
                folds.push(LodoFold {
                    task: held_out.clone(),
                    held_out_count: test.len(),
                    accuracy: Some(correct as f64 / test.len().max(1) as f64),
                    error: None,
                });
            }
            Err(e) => folds.push(LodoFold {
                task: held_out.clone(),
                held_out_count: test.len(),
                accuracy: None,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(folds)
}

/// Training-set decision accuracy of a model.
pub fn training_accuracy(model: &LogisticModel, samples: &[(CriteriaVector, bool)]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let correct = samples
        .iter()
        .filter(|(v, label)| (decide(model, v).1 == Decision::Synthesis) == *label)
        .count();
    correct as f64 / samples.len() as f64
}
