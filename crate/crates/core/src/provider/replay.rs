//! Content-addressed record/replay store: one file per request digest,
//! holding the canonical request (for auditability) and the serialized
//! response. Reads are lock-free; writes serialize through one mutex.

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{ModelRequest, ModelResponse};

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    digest: String,
    request: serde_json::Value,
    response: ModelResponse,
}

#[derive(Clone)]
pub struct ReplayCache {
    dir: PathBuf,
    writer: Arc<Mutex<()>>,
}

impl ReplayCache {
    /// Open (creating if needed) a cache directory.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            writer: Arc::new(Mutex::new(())),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.json"))
    }

    /// Cached response for a digest, when present.
    pub fn load(&self, digest: &str) -> Result<Option<ModelResponse>> {
        let path = self.entry_path(digest);
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let entry: CacheEntry = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("corrupt cache entry {}: {e}", path.display())))?;
        Ok(Some(entry.response))
    }

    /// Persist a response under its digest. Atomic via temp-file rename.
    pub fn store(
        &self,
        digest: &str,
        request: &ModelRequest,
        response: &ModelResponse,
    ) -> Result<()> {
        let entry = CacheEntry {
            digest: digest.to_string(),
            request: request.canonical_value(),
            response: response.clone(),
        };
        let body = serde_json::to_string_pretty(&entry)?;
        let _guard = self.writer.lock().expect("cache writer lock");
        let tmp = self.dir.join(format!(".{digest}.tmp"));
        std::fs::write(&tmp, body)?;
        std::fs::rename(&tmp, self.entry_path(digest))?;
        Ok(())
    }

    /// Number of entries on disk.
    pub fn len(&self) -> usize {
        std::fs::read_dir(&self.dir)
            .map(|entries| {
                entries
                    .filter_map(|e| e.ok())
                    .filter(|e| e.path().extension().is_some_and(|ext| ext == "json"))
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
