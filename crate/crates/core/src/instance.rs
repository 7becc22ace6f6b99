//! Reasoning instances: one problem with its answer contract.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::answer::{AnswerSpec, AnswerValue};

/// Media attachment kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Png,
    Jpeg,
}

impl MediaKind {
    pub fn mime(&self) -> &'static str {
        match self {
            MediaKind::Png => "image/png",
            MediaKind::Jpeg => "image/jpeg",
        }
    }

    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "png" => Some(MediaKind::Png),
            "jpg" | "jpeg" => Some(MediaKind::Jpeg),
            _ => None,
        }
    }
}

/// A media attachment referenced by an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MediaRef {
    pub path: PathBuf,
    pub kind: MediaKind,
}

/// Which split an instance belongs to, assigned before any
/// calibration-dependent operation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Calibration,
    Evaluation,
    #[default]
    Unassigned,
}

/// One reasoning problem: raw query, optional attachments, answer contract,
/// and (when known) the gold answer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReasoningInstance {
    pub id: String,
    pub task_name: String,
    pub query_text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attachments: Vec<MediaRef>,
    pub answer_spec: AnswerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_answer: Option<AnswerValue>,
    #[serde(default)]
    pub split_tag: SplitTag,
}

impl ReasoningInstance {
    /// Minimal text-only instance, useful in tests and the one-shot CLI path.
    pub fn text_only(
        id: impl Into<String>,
        task: impl Into<String>,
        query: impl Into<String>,
        spec: AnswerSpec,
    ) -> Self {
        Self {
            id: id.into(),
            task_name: task.into(),
            query_text: query.into(),
            attachments: Vec::new(),
            answer_spec: spec,
            gold_answer: None,
            split_tag: SplitTag::Unassigned,
        }
    }
}
