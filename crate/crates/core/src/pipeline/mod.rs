//! End-to-end runs: ingest → train → align → diverge → cluster.
//!
//! A run is described by one declarative TOML document ([`RunConfig`]) and
//! writes every artifact under its output directory together with a
//! [`RunManifest`]. Trained models and alignment tables are cached next to
//! their artifacts, keyed on the content hash of their inputs and config
//! subsection, so reruns with unchanged inputs retrain nothing.

mod genome;
mod manifest;
mod natural;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alignment::AlignmentConfig;
use crate::corpus::{CorpusFormat, GenomeFormat, InvalidBasePolicy, PunctuationMode, MAX_NGRAM, MIN_NGRAM};
use crate::divergence::PivotScope;
use crate::embedding::EmbeddingConfig;
use crate::error::{Error, Result};

pub use genome::run_genome;
pub use manifest::{Artifact, ArtifactKind, CacheStats, RunManifest, StageTiming, MANIFEST_FILE};
pub use natural::run_natural;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "WELD_OUT";

pub const TOOL_VERSION: &str = concat!("weld ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Workflow {
    Natural,
    Genome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub workflow: Workflow,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Overrides the embedding seed when set.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Concurrent per-language / per-organism tasks. Defaults to the number
    /// of CPUs.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub natural: Option<NaturalConfig>,
    #[serde(default)]
    pub genome: Option<GenomeConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("weld-out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaturalConfig {
    /// Directory with one file per language.
    pub corpus: PathBuf,
    #[serde(default = "default_corpus_format")]
    pub format: CorpusFormat,
    pub pivot: String,
    /// Languages to compare; empty means every language in the corpus.
    #[serde(default)]
    pub languages: Vec<String>,
    #[serde(default)]
    pub punctuation: PunctuationMode,
    #[serde(default = "EmbeddingConfig::natural")]
    pub embedding: EmbeddingConfig,
    #[serde(default)]
    pub alignment: AlignmentConfig,
    #[serde(default)]
    pub scope: PivotScope,
    /// `label<TAB>family<TAB>subfamily` sidecar used to color the tree.
    #[serde(default)]
    pub annotations: Option<PathBuf>,
}

fn default_corpus_format() -> CorpusFormat {
    CorpusFormat::Tsv
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrganismSpec {
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "default_genome_format")]
    pub format: GenomeFormat,
}

fn default_genome_format() -> GenomeFormat {
    GenomeFormat::Fasta
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenomeConfig {
    pub organisms: Vec<OrganismSpec>,
    #[serde(default = "default_ngrams")]
    pub ngrams: Vec<usize>,
    #[serde(default)]
    pub policy: InvalidBasePolicy,
    #[serde(default = "EmbeddingConfig::genome")]
    pub embedding: EmbeddingConfig,
    #[serde(default)]
    pub annotations: Option<PathBuf>,
}

fn default_ngrams() -> Vec<usize> {
    (MIN_NGRAM..=MAX_NGRAM).collect()
}

impl RunConfig {
    /// Parse a TOML document. Relative paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.out);
        if let Some(n) = config.natural.as_mut() {
            resolve(&mut n.corpus);
            if let Some(a) = n.annotations.as_mut() {
                resolve(a);
            }
        }
        if let Some(g) = config.genome.as_mut() {
            for o in &mut g.organisms {
                resolve(&mut o.path);
            }
            if let Some(a) = g.annotations.as_mut() {
                resolve(a);
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Read a config file; `WELD_OUT`, when set, replaces the output directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut config = Self::from_toml(&text, base)?;
        if let Some(out) = std::env::var_os(OUT_DIR_ENV) {
            config.out = PathBuf::from(out);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        match self.workflow {
            Workflow::Natural => {
                let n = self
                    .natural
                    .as_ref()
                    .ok_or_else(|| Error::Config("natural workflow needs a [natural] section".into()))?;
                if n.pivot.is_empty() {
                    return Err(Error::Config("pivot language must be set".into()));
                }
                if n.languages.len() == 1 {
                    return Err(Error::Config("at least 2 languages are needed".into()));
                }
                n.embedding.validate()?;
                if !(n.alignment.threshold > 0.0 && n.alignment.threshold <= 1.0) {
                    return Err(Error::Config("alignment threshold must be in (0, 1]".into()));
                }
                if n.alignment.iterations == 0 || n.alignment.min_count == 0 {
                    return Err(Error::Config("alignment iterations and min_count must be >= 1".into()));
                }
            }
            Workflow::Genome => {
                let g = self
                    .genome
                    .as_ref()
                    .ok_or_else(|| Error::Config("genome workflow needs a [genome] section".into()))?;
                if g.organisms.len() < 2 {
                    return Err(Error::Config("at least 2 organisms are needed".into()));
                }
                let mut names: Vec<&str> = g.organisms.iter().map(|o| o.name.as_str()).collect();
                names.sort_unstable();
                if names.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::Config("organism names must be unique".into()));
                }
                if g.ngrams.is_empty() {
                    return Err(Error::Config("n-gram set must not be empty".into()));
                }
                if let Some(n) = g.ngrams.iter().find(|n| !(MIN_NGRAM..=MAX_NGRAM).contains(n)) {
                    return Err(Error::Config(format!(
                        "n-gram length {n} outside {MIN_NGRAM}..={MAX_NGRAM}"
                    )));
                }
                g.embedding.validate()?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of this config.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    fn embedding_for(&self, base: &EmbeddingConfig) -> EmbeddingConfig {
        let mut cfg = base.clone();
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = self.threads {
            builder = builder.num_threads(t);
        }
        builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Cache key for a stage: hash of its name, input digests and config JSON.
fn cache_key<C: Serialize>(stage: &str, inputs: &[&str], config: &C) -> String {
    let mut h = Sha256::new();
    h.update(TOOL_VERSION.as_bytes());
    h.update([0]);
    h.update(stage.as_bytes());
    for input in inputs {
        h.update([0]);
        h.update(input.as_bytes());
    }
    h.update([0]);
    h.update(serde_json::to_string(config).expect("config serializes").as_bytes());
    hex::encode(h.finalize())
}

fn key_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".key");
    artifact.with_file_name(name)
}

/// Return the artifact at `path` if its recorded key equals `key`,
/// otherwise build it, write it and record the key. The flag is `true` on
/// a cache hit.
fn cached<T>(
    path: &Path,
    key: &str,
    load: impl FnOnce(&Path) -> Result<T>,
    build: impl FnOnce() -> Result<T>,
    save: impl FnOnce(&T, &Path) -> Result<()>,
) -> Result<(T, bool)> {
    let kp = key_path(path);
    if path.is_file() && fs::read_to_string(&kp).is_ok_and(|k| k.trim() == key) {
        match load(path) {
            Ok(value) => return Ok((value, true)),
            Err(e) => log::warn!("cached {} unreadable, rebuilding: {e}", path.display()),
        }
    }
    let value = build()?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    save(&value, path)?;
    fs::write(&kp, key).map_err(|e| Error::io(&kp, e))?;
    Ok((value, false))
}

/// Tag an error with the stage that produced it and the stage's input digest.
fn in_stage<T>(stage: &str, digest: &str, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage: stage.to_string(),
            digest: digest.chars().take(16).collect(),
            source: Box::new(e),
        },
    })
}

/// Records stage timings while a run progresses.
struct Clock {
    timings: Vec<StageTiming>,
}

impl Clock {
    fn new() -> Self {
        Clock { timings: Vec::new() }
    }

    fn time<T>(&mut self, stage: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming {
            stage: stage.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NATURAL: &str = r#"
workflow = "natural"
out = "out"
seed = 7

[natural]
corpus = "corpus"
pivot = "en"
languages = ["en", "de"]

[natural.embedding]
dim = 20
"#;

    #[test]
    fn natural_config_resolves_paths_and_defaults() {
        let c = RunConfig::from_toml(NATURAL, Path::new("/base")).unwrap();
        assert_eq!(c.out, PathBuf::from("/base/out"));
        let n = c.natural.as_ref().unwrap();
        assert_eq!(n.corpus, PathBuf::from("/base/corpus"));
        assert_eq!(n.embedding.dim, 20);
        assert_eq!(n.embedding.window, 10);
        assert_eq!(n.alignment, AlignmentConfig::default());
        assert_eq!(c.embedding_for(&n.embedding).seed, 7);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = Path::new(".");
        assert!(RunConfig::from_toml("workflow = \"natural\"", base).is_err());
        assert!(RunConfig::from_toml(&NATURAL.replace("seed = 7", "bogus = 1"), base).is_err());
        let genome = r#"
workflow = "genome"
[genome]
ngrams = [3, 7]
organisms = [{ name = "a", path = "a.fa" }, { name = "b", path = "b.fa" }]
"#;
        assert!(matches!(RunConfig::from_toml(genome, base), Err(Error::Config(_))));
        let ok = RunConfig::from_toml(&genome.replace("[3, 7]", "[3]"), base).unwrap();
        assert_eq!(ok.genome.unwrap().embedding.window, 40);
    }

    #[test]
    fn cache_keys_depend_on_every_input() {
        let a = cache_key("train", &["x"], &1);
        assert_eq!(a, cache_key("train", &["x"], &1));
        assert_ne!(a, cache_key("train", &["y"], &1));
        assert_ne!(a, cache_key("train", &["x"], &2));
        assert_ne!(a, cache_key("align", &["x"], &1));
    }
}
