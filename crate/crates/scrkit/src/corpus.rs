//! Access to the pacemaker regression corpus shipped in `corpus/pacemaker`.
//!
//! The corpus is the repository's acceptance baseline: two specification
//! variants (buggy and fixed POR exits), three scenarios, and an index of
//! expected verdicts that the test suites replay.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusEntry {
    /// Specification file name relative to the corpus directory.
    pub spec: String,
    /// Scenario file name relative to the corpus directory.
    pub scenario: String,
    /// `"violation"` or `"no-violation"`.
    pub expect: String,
    /// Whether the pair belongs to the canonical four used for external
    /// cross-checking.
    pub canonical: bool,
    #[serde(default)]
    pub note: String,
}

impl CorpusEntry {
    pub fn expects_violation(&self) -> bool {
        self.expect == "violation"
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusIndex {
    pub entries: Vec<CorpusEntry>,
}

/// Repository-relative corpus directory; valid when running from a source
/// checkout (tests, CI).
pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/pacemaker")
}

pub fn load_index(dir: &Path) -> std::io::Result<CorpusIndex> {
    let text = std::fs::read_to_string(dir.join("index.json"))?;
    serde_json::from_str(&text)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
