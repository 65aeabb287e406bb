use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the context window around a center word is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    /// Effective radius drawn uniformly from `1..=window` per center word.
    #[default]
    Sampled,
    /// Always use the full radius.
    Fixed,
}

/// Skip-gram training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// Vector dimension.
    pub dim: usize,
    /// Context radius: up to `window` words on each side.
    pub window: usize,
    pub window_mode: WindowMode,
    /// Subsampling threshold `t`.
    pub subsample: f64,
    /// Negative samples per positive pair.
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_count: u64,
    pub seed: u64,
    /// Worker threads. `1` is the deterministic mode; more threads update
    /// the shared matrices lock-free and are not bit-reproducible.
    pub threads: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig::natural()
    }
}

impl EmbeddingConfig {
    /// Natural-language defaults: d = 100, c = 10, t = 1e-3.
    pub fn natural() -> Self {
        EmbeddingConfig {
            dim: 100,
            window: 10,
            window_mode: WindowMode::Sampled,
            subsample: 1e-3,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_count: 5,
            seed: 1,
            threads: 1,
        }
    }

    /// Genome defaults: as [`natural`](Self::natural) but c = 40 and
    /// min_count = 1.
    pub fn genome() -> Self {
        EmbeddingConfig {
            window: 40,
            min_count: 1,
            ..Self::natural()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.dim < 1 {
            return fail("dim must be >= 1");
        }
        if self.window < 1 {
            return fail("window must be >= 1");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return fail("subsample must be in (0, 1]");
        }
        if self.negatives < 1 {
            return fail("negatives must be >= 1");
        }
        if self.epochs < 1 {
            return fail("epochs must be >= 1");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return fail("initial_lr must be > 0");
        }
        if self.min_count < 1 {
            return fail("min_count must be >= 1");
        }
        if self.threads < 1 {
            return fail("threads must be >= 1");
        }
        Ok(())
    }
}
