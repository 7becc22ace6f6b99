//! Structured program input: a JSON-valued tree with canonical serialization.
//!
//! The canonical form — UTF-8, object keys sorted lexicographically, no
//! insignificant whitespace, minimal escaping — is bit-exact across runs and
//! feeds cache keys and result files. `serde_json`'s default map is ordered
//! (BTreeMap), so a parse/serialize cycle through [`SymbolStore`] always
//! lands on the same bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The structured abstraction of one instance's raw input, passed to guest
/// programs as their sole argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolStore {
    root: serde_json::Value,
}

impl SymbolStore {
    pub fn new(root: serde_json::Value) -> Self {
        Self { root }
    }

    /// Parse from JSON text, normalizing into canonical ordering.
    pub fn from_json(text: &str) -> Result<Self> {
        let root: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::MissingBlock(format!("bad JSON symbols: {e}")))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &serde_json::Value {
        &self.root
    }

    /// Canonical serialization (sorted keys, compact, minimal escaping).
    pub fn canonical_json(&self) -> String {
        canonical_json(&self.root)
    }

    /// Canonical bytes, the form stored in cache keys and result files.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        self.canonical_json().into_bytes()
    }
}

impl Default for SymbolStore {
    fn default() -> Self {
        Self {
            root: serde_json::Value::Null,
        }
    }
}

/// Canonical rendering of any JSON value. `serde_json::Value` keeps object
/// keys in a sorted map and its compact writer emits no insignificant
/// whitespace, so serializing the tree directly is canonical.
pub fn canonical_json(value: &serde_json::Value) -> String {
    serde_json::to_string(value).expect("JSON tree serialization cannot fail")
}
