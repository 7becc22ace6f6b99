//! Aggregation: per-task accuracy, shifted harmonic mean, issue-category
//! rates, non-trivial rates, and token/cost accounting.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bench::records::RunRecord;
use crate::error::{Error, Result};
use crate::evaluator::IssueCategory;
use crate::provider::{estimate_cost, PriceSheet, TokenUsage};
use crate::stats::{harmonic_mean_shifted, REPORT_HM_SHIFT};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub per_task_accuracy: BTreeMap<String, f64>,
    pub per_task_count: BTreeMap<String, usize>,
    /// Harmonic mean of per-task accuracy, computed over `accuracy + 0.01`
    /// so zero-accuracy tasks stay finite (the convention the published
    /// per-task tables aggregate with).
    pub harmonic_mean_accuracy: f64,
    /// Fraction of code-attempting records per issue category, under the
    /// syntax > placeholder > type > trivial precedence.
    pub per_category_issue_rates: BTreeMap<String, f64>,
    pub nontrivial_rate_per_task: BTreeMap<String, f64>,
    pub records: usize,
    pub code_attempts: usize,
    pub total_usage: TokenUsage,
    pub total_cost_usd: f64,
}

/// Aggregate records into a report. A record counts correct only when its
/// `correct` flag is true; instances without gold answers count as
/// incorrect in accuracy denominators.
pub fn build_report(records: &[RunRecord]) -> Result<Report> {
    if records.is_empty() {
        return Err(Error::EmptyInput("build_report over no records"));
    }
    let mut by_task: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut nontrivial: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut category_counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut code_attempts = 0usize;
    let mut total_usage = TokenUsage::default();
    let mut total_cost = 0.0f64;

    for record in records {
        let entry = by_task.entry(record.task.clone()).or_insert((0, 0));
        entry.1 += 1;
        if record.correct == Some(true) {
            entry.0 += 1;
        }
        let nt = nontrivial.entry(record.task.clone()).or_insert((0, 0));
        nt.1 += 1;
        if record.well_formed && record.non_trivial {
            nt.0 += 1;
        }
        if record.attempted_code {
            code_attempts += 1;
            if let Some(category) = record.issues.primary_category() {
                *category_counts.entry(category.as_str()).or_insert(0) += 1;
            }
        }
        total_usage.add(record.usage);
        total_cost += record.cost_usd;
    }

    let per_task_accuracy: BTreeMap<String, f64> = by_task
        .iter()
        .map(|(task, (correct, total))| (task.clone(), *correct as f64 / *total as f64))
        .collect();
    let per_task_count: BTreeMap<String, usize> = by_task
        .iter()
        .map(|(task, (_, total))| (task.clone(), *total))
        .collect();
    let accuracies: Vec<f64> = per_task_accuracy.values().copied().collect();
    let harmonic_mean_accuracy = harmonic_mean_shifted(&accuracies, REPORT_HM_SHIFT)?;

    let per_category_issue_rates: BTreeMap<String, f64> = IssueCategory::ALL
        .iter()
        .map(|category| {
            let count = category_counts.get(category.as_str()).copied().unwrap_or(0);
            let rate = if code_attempts == 0 {
                0.0
            } else {
                count as f64 / code_attempts as f64
            };
            (category.as_str().to_string(), rate)
        })
        .collect();
    let nontrivial_rate_per_task: BTreeMap<String, f64> = nontrivial
        .iter()
        .map(|(task, (nt, total))| (task.clone(), *nt as f64 / *total as f64))
        .collect();

    Ok(Report {
        per_task_accuracy,
        per_task_count,
        harmonic_mean_accuracy,
        per_category_issue_rates,
        nontrivial_rate_per_task,
        records: records.len(),
        code_attempts,
        total_usage,
        total_cost_usd: total_cost,
    })
}

impl Report {
    /// Human-readable table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<28} {:>8} {:>10} {:>12}\n",
            "task", "n", "accuracy", "non-trivial"
        ));
        for (task, accuracy) in &self.per_task_accuracy {
            out.push_str(&format!(
                "{:<28} {:>8} {:>10.3} {:>12.3}\n",
                task,
                self.per_task_count.get(task).copied().unwrap_or(0),
                accuracy,
                self.nontrivial_rate_per_task
                    .get(task)
                    .copied()
                    .unwrap_or(0.0),
            ));
        }
        out.push_str(&format!(
            "\nharmonic mean accuracy: {:.3}\n",
            self.harmonic_mean_accuracy
        ));
        out.push_str(&format!(
            "records: {}   code attempts: {}\n",
            self.records, self.code_attempts
        ));
        out.push_str("issue rates over code attempts:\n");
        for (category, rate) in &self.per_category_issue_rates {
            out.push_str(&format!("  {category:<14} {rate:.3}\n"));
        }
        out.push_str(&format!(
            "tokens: {} in / {} out   cost: ${:.4}\n",
            self.total_usage.input_tokens, self.total_usage.output_tokens, self.total_cost_usd
        ));
        out
    }

    /// Per-task accuracy CSV.
    pub fn accuracy_csv(&self) -> String {
        let mut out = String::from("task,count,accuracy,nontrivial_rate\n");
        for (task, accuracy) in &self.per_task_accuracy {
            out.push_str(&format!(
                "{task},{},{accuracy},{}\n",
                self.per_task_count.get(task).copied().unwrap_or(0),
                self.nontrivial_rate_per_task
                    .get(task)
                    .copied()
                    .unwrap_or(0.0),
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodCost {
    pub records: usize,
    pub total_input_tokens: u64,
    pub total_output_tokens: u64,
    pub avg_input_tokens: f64,
    pub avg_output_tokens: f64,
    pub total_usd: f64,
    pub avg_usd: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    pub per_method: BTreeMap<String, MethodCost>,
    pub total_usd: f64,
}

/// Token and dollar accounting, per method and overall, priced with the
/// given sheet.
pub fn cost_report(records: &[RunRecord], prices: &PriceSheet) -> CostReport {
    let mut grouped: BTreeMap<String, Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        grouped
            .entry(record.method.clone())
            .or_default()
            .push(record);
    }
    let mut per_method = BTreeMap::new();
    let mut total_usd = 0.0;
    for (method, group) in grouped {
        let n = group.len();
        let input: u64 = group.iter().map(|r| r.usage.input_tokens).sum();
        let output: u64 = group.iter().map(|r| r.usage.output_tokens).sum();
        let usd: f64 = group.iter().map(|r| estimate_cost(r.usage, prices)).sum();
        total_usd += usd;
        per_method.insert(
            method,
            MethodCost {
                records: n,
                total_input_tokens: input,
                total_output_tokens: output,
                avg_input_tokens: input as f64 / n as f64,
                avg_output_tokens: output as f64 / n as f64,
                total_usd: usd,
                avg_usd: usd / n as f64,
            },
        );
    }
    CostReport {
        per_method,
        total_usd,
    }
}

impl CostReport {
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "{:<14} {:>8} {:>14} {:>14} {:>12}\n",
            "method", "n", "avg in tok", "avg out tok", "avg usd"
        );
        for (method, cost) in &self.per_method {
            out.push_str(&format!(
                "{:<14} {:>8} {:>14.2} {:>14.2} {:>12.6}\n",
                method, cost.records, cost.avg_input_tokens, cost.avg_output_tokens, cost.avg_usd
            ));
        }
        out.push_str(&format!("total usd: ${:.4}\n", self.total_usd));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::records::RecordIssues;

    fn record(task: &str, correct: bool, usage: (u64, u64)) -> RunRecord {
        RunRecord {
            instance_id: format!("{task}-{correct}-{}", usage.0),
            task: task.to_string(),
            method: "pot".to_string(),
            solve_method: "pot".to_string(),
            split: "evaluation".to_string(),
            final_answer: Some("x".into()),
            correct: Some(correct),
            well_formed: correct,
            non_trivial: correct,
            attempted_code: true,
            issues: RecordIssues::default(),
            switch: None,
            usage: TokenUsage::new(usage.0, usage.1),
            cost_usd: 0.0,
            warnings: Vec::new(),
            error: None,
            trace: None,
            wall_seconds: 0.0,
        }
    }

    #[test]
    fn all_correct_single_task() {
        let records = vec![record("t", true, (10, 10)), record("t2", true, (10, 10))];
        let report = build_report(&records).expect("report");
        assert_eq!(report.per_task_accuracy["t"], 1.0);
        // Shifted harmonic mean of {1.0, 1.0} is 1.01.
        assert!((report.harmonic_mean_accuracy - 1.01).abs() < 1e-9);
    }

    #[test]
    fn empty_is_error() {
        assert!(build_report(&[]).is_err());
    }

    #[test]
    fn harmonic_mean_matches_independent_recompute() {
        let records = vec![
            record("a", true, (1, 1)),
            record("a", false, (1, 1)),
            record("b", true, (1, 1)),
            record("b", true, (1, 1)),
            record("b", false, (1, 1)),
            record("b", false, (1, 1)),
        ];
        let report = build_report(&records).expect("report");
        let accs: Vec<f64> = report.per_task_accuracy.values().copied().collect();
        let recomputed = harmonic_mean_shifted(&accs, REPORT_HM_SHIFT).unwrap();
        assert!((report.harmonic_mean_accuracy - recomputed).abs() < 1e-12);
    }

    #[test]
    fn cost_averages() {
        let records = vec![
            record("t", true, (100, 200)),
            record("t", false, (100, 200)),
        ];
        let report = cost_report(&records, &PriceSheet::default());
        let pot = &report.per_method["pot"];
        assert_eq!(pot.avg_input_tokens, 100.0);
        assert_eq!(pot.avg_output_tokens, 200.0);
        assert_eq!(pot.total_usd, 0.0);
    }
}
