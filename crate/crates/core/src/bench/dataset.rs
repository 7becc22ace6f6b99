//! Dataset loading and calibration/evaluation splitting.
//!
//! Input is JSONL, one instance per line:
//! `{"id", "task", "question", "images"?, "answer"?, "answer_kind"?,
//! "options"?, "rel_tol"?}`. `answer_kind` defaults to free text; `options`
//! implies multiple choice. Image paths resolve relative to the dataset
//! file and must be readable at load time.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::answer::{normalize_answer, AnswerKind, AnswerSpec};
use crate::error::{Error, Result};
use crate::instance::{MediaKind, MediaRef, ReasoningInstance, SplitTag};
use crate::util::SplitMix64;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub instances: Vec<ReasoningInstance>,
    pub source_path: PathBuf,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    task: String,
    question: String,
    #[serde(default)]
    images: Vec<String>,
    #[serde(default)]
    answer: Option<serde_json::Value>,
    #[serde(default)]
    answer_kind: Option<String>,
    #[serde(default)]
    options: Option<Vec<String>>,
    #[serde(default)]
    rel_tol: Option<f64>,
}

fn parse_kind(raw: &str) -> Option<AnswerKind> {
    Some(match raw {
        "free_text" => AnswerKind::FreeText,
        "integer" => AnswerKind::Integer,
        "decimal" => AnswerKind::Decimal,
        "multiple_choice" => AnswerKind::MultipleChoice,
        "boolean" => AnswerKind::Boolean,
        _ => return None,
    })
}

/// Convert one raw record into an instance; errors are plain messages so
/// callers can attach path/line context.
fn convert(raw: RawRecord, dir: &Path) -> std::result::Result<ReasoningInstance, String> {
    let kind = match (&raw.answer_kind, &raw.options) {
        (Some(k), _) => parse_kind(k).ok_or_else(|| format!("unknown answer_kind '{k}'"))?,
        (None, Some(_)) => AnswerKind::MultipleChoice,
        (None, None) => AnswerKind::FreeText,
    };
    let spec = AnswerSpec {
        kind,
        options: raw.options,
        numeric_rel_tol: raw.rel_tol.unwrap_or(1e-6),
    };
    spec.validate().map_err(|e| e.to_string())?;

    let gold_answer = match &raw.answer {
        Some(value) => {
            Some(normalize_answer(value, &spec).map_err(|e| format!("bad gold answer: {e}"))?)
        }
        None => None,
    };

    let mut attachments = Vec::new();
    for image in &raw.images {
        let image_path = dir.join(image);
        if !image_path.is_file() {
            return Err(format!("attachment not readable: {}", image_path.display()));
        }
        let kind = MediaKind::from_path(&image_path)
            .ok_or_else(|| format!("unsupported media type: {image}"))?;
        attachments.push(MediaRef {
            path: image_path,
            kind,
        });
    }

    Ok(ReasoningInstance {
        id: raw.id,
        task_name: raw.task,
        query_text: raw.question,
        attachments,
        answer_spec: spec,
        gold_answer,
        split_tag: SplitTag::Unassigned,
    })
}

/// Load a single instance from a JSON object file (same schema as one
/// dataset line; `id` and `task` default when omitted).
pub fn load_instance(path: impl AsRef<Path>) -> Result<ReasoningInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::SchemaError {
            path: path.display().to_string(),
            line: 1,
            message: format!("malformed instance: {e}"),
        })?;
    if value.get("id").is_none() {
        value["id"] = serde_json::json!("instance");
    }
    if value.get("task").is_none() {
        value["task"] = serde_json::json!("adhoc");
    }
    let raw: RawRecord = serde_json::from_value(value).map_err(|e| Error::SchemaError {
        path: path.display().to_string(),
        line: 1,
        message: format!("malformed instance: {e}"),
    })?;
    convert(raw, path.parent().unwrap_or_else(|| Path::new("."))).map_err(|message| {
        Error::SchemaError {
            path: path.display().to_string(),
            line: 1,
            message,
        }
    })
}

/// Load a JSONL dataset, validating ids, answer specs, and attachments.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();

    let schema_err = |line: usize, message: String| Error::SchemaError {
        path: path.display().to_string(),
        line,
        message,
    };

    let mut instances = Vec::new();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(line)
            .map_err(|e| schema_err(line_no, format!("malformed record: {e}")))?;
        if !seen_ids.insert(raw.id.clone()) {
            return Err(schema_err(line_no, format!("duplicate id '{}'", raw.id)));
        }
        instances.push(convert(raw, dir).map_err(|message| schema_err(line_no, message))?);
    }
    if instances.is_empty() {
        return Err(schema_err(0, "dataset is empty".into()));
    }
    Ok(Dataset {
        name,
        instances,
        source_path: path.to_path_buf(),
    })
}

fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for byte in text.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Tag a seeded calibration fraction per task: after a per-task shuffle,
/// the first ⌈fraction·n⌉ instances become calibration, the rest
/// evaluation. Deterministic for a fixed seed.
pub fn split_calibration(dataset: &mut Dataset, fraction: f64, seed: u64) -> Result<()> {
    if !(0.0..1.0).contains(&fraction) || fraction == 0.0 {
        return Err(Error::Config(format!(
            "calibration fraction must be in (0, 1), got {fraction}"
        )));
    }
    let tasks: BTreeSet<String> = dataset
        .instances
        .iter()
        .map(|i| i.task_name.clone())
        .collect();
    for task in tasks {
        let mut indices: Vec<usize> = dataset
            .instances
            .iter()
            .enumerate()
            .filter(|(_, inst)| inst.task_name == task)
            .map(|(idx, _)| idx)
            .collect();
        let mut rng = SplitMix64::new(seed ^ fnv1a(&task));
        rng.shuffle(&mut indices);
        let calibration_count =
            ((fraction * indices.len() as f64).ceil() as usize).min(indices.len());
        for (rank, idx) in indices.into_iter().enumerate() {
            dataset.instances[idx].split_tag = if rank < calibration_count {
                SplitTag::Calibration
            } else {
                SplitTag::Evaluation
            };
        }
    }
    Ok(())
}
