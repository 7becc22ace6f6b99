//! Guest-language program artifacts.

use serde::{Deserialize, Serialize};

/// Entry-point name every generated program must define.
pub const ENTRY_NAME: &str = "solve";

/// One generated program: guest source with a fixed entry function, tagged
/// with the loop iteration that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramArtifact {
    pub source: String,
    pub entry_name: String,
    pub origin_iteration: u32,
}

impl ProgramArtifact {
    pub fn new(source: impl Into<String>, origin_iteration: u32) -> Self {
        Self {
            source: source.into(),
            entry_name: ENTRY_NAME.to_string(),
            origin_iteration,
        }
    }
}
