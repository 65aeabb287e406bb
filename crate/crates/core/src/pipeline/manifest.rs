use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{sha256_hex, Workflow, TOOL_VERSION};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    Corpus,
    Vocabulary,
    Model,
    Table,
    Matrix,
    Heatmap,
    Tree,
    Figure,
}

/// One output file, relative to the run's output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub kind: ArtifactKind,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub workflow: Workflow,
    pub config_hash: String,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<StageTiming>,
    pub cache: CacheStats,
    /// Ingestion counts, e.g. verses per language or coding regions and
    /// n-gram tokens per organism.
    pub statistics: serde_json::Map<String, serde_json::Value>,
    pub warnings: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub(crate) fn new(workflow: Workflow, config_hash: String) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            workflow,
            config_hash,
            artifacts: Vec::new(),
            timings: Vec::new(),
            cache: CacheStats::default(),
            statistics: serde_json::Map::new(),
            warnings: Vec::new(),
        }
    }

    /// Hash `path` (inside `out`) and list it.
    pub(crate) fn record(&mut self, out: &Path, kind: ArtifactKind, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let rel = path.strip_prefix(out).unwrap_or(path).to_path_buf();
        self.artifacts.push(Artifact {
            kind,
            path: rel,
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn artifacts_of(&self, kind: ArtifactKind) -> impl Iterator<Item = &Artifact> {
        self.artifacts.iter().filter(move |a| a.kind == kind)
    }

    /// Check that every artifact exists under `out` with its recorded hash.
    pub fn verify(&self, out: &Path) -> Result<()> {
        for a in &self.artifacts {
            let path = out.join(&a.path);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let actual = sha256_hex(&bytes);
            if actual != a.sha256 {
                return Err(Error::Format(format!(
                    "artifact {} hash {actual} does not match manifest {}",
                    a.path.display(),
                    a.sha256
                )));
            }
        }
        Ok(())
    }

    pub fn save(&self, out: &Path) -> Result<PathBuf> {
        let path = out.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(out: &Path) -> Result<Self> {
        let path = out.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("manifest: {e}")))
    }
}
