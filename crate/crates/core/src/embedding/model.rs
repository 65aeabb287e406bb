use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

use super::config::EmbeddingConfig;

/// Trained skip-gram model: input (`v_w`) and context (`v'_w`) matrices,
/// both `|V| × dim`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel<T> {
    pub(crate) vocab: Vocabulary,
    pub(crate) dim: usize,
    pub(crate) input: Vec<T>,
    pub(crate) context: Vec<T>,
    pub(crate) config: EmbeddingConfig,
}

impl<T: Real> EmbeddingModel<T> {
    /// Assemble a model from explicit matrices.
    pub fn from_parts(
        vocab: Vocabulary,
        dim: usize,
        input: Vec<T>,
        context: Vec<T>,
        config: EmbeddingConfig,
    ) -> Result<Self> {
        let expected = vocab.len() * dim;
        if dim == 0 || input.len() != expected || context.len() != expected {
            return Err(Error::Format(format!(
                "matrix shape mismatch: |V| = {}, dim = {dim}, input {} and context {} values",
                vocab.len(),
                input.len(),
                context.len()
            )));
        }
        if input.iter().chain(&context).any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite matrix entry".into()));
        }
        Ok(EmbeddingModel {
            vocab,
            dim,
            input,
            context,
            config,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn input_matrix(&self) -> &[T] {
        &self.input
    }

    pub fn context_matrix(&self) -> &[T] {
        &self.context
    }

    pub fn input_row(&self, id: u32) -> &[T] {
        let start = id as usize * self.dim;
        &self.input[start..start + self.dim]
    }

    pub fn context_row(&self, id: u32) -> &[T] {
        let start = id as usize * self.dim;
        &self.context[start..start + self.dim]
    }

    /// Word vector by id: the mean of the input and context rows.
    pub fn vector_by_id(&self, id: u32) -> Vec<T> {
        let half = T::lit(0.5);
        self.input_row(id)
            .iter()
            .zip(self.context_row(id))
            .map(|(&a, &b)| (a + b) * half)
            .collect()
    }

    /// Word vector: `(v_w + v'_w) / 2`.
    pub fn word_vector(&self, word: &str) -> Result<Vec<T>> {
        let id = self
            .vocab
            .id(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_string()))?;
        Ok(self.vector_by_id(id))
    }

    /// Cosine similarity between the word vectors of two words.
    pub fn similarity(&self, a: &str, b: &str) -> Result<T> {
        cosine(&self.word_vector(a)?, &self.word_vector(b)?)
    }

    /// The `k` nearest vocabulary words to `word` by cosine similarity.
    pub fn most_similar(&self, word: &str, k: usize) -> Result<Vec<(String, T)>> {
        let query = self.word_vector(word)?;
        let qid = self.vocab.id(word).unwrap();
        let mut scored: Vec<(u32, T)> = (0..self.vocab.len() as u32)
            .filter(|&id| id != qid)
            .filter_map(|id| cosine(&query, &self.vector_by_id(id)).ok().map(|s| (id, s)))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(id, s)| (self.vocab.word(id).to_string(), s))
            .collect())
    }
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`, clamped to `[-1, 1]`.
pub fn cosine<T: Real>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::ZeroVector);
    }
    let c = dot(u, v) / (nu * nv);
    Ok(c.max(-T::one()).min(T::one()))
}
