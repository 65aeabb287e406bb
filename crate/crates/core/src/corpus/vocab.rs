use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Indexed word set with occurrence counts.
///
/// Ids are dense (`0..len`) and ordered by descending count, ties broken
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Build from `(word, count)` pairs, keeping words with `count >= min_count`.
    pub fn from_counts<I, S>(counts: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let mut pairs: Vec<(String, u64)> = counts
            .into_iter()
            .map(|(w, c)| (w.into(), c))
            .filter(|(_, c)| *c >= min_count)
            .collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_ordered(pairs)
    }

    /// Build from pairs already in id order, as read from a vocabulary file.
    fn from_ordered(pairs: Vec<(String, u64)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(pairs.len());
        let mut words = Vec::with_capacity(pairs.len());
        let mut counts = Vec::with_capacity(pairs.len());
        for (id, (word, count)) in pairs.into_iter().enumerate() {
            if index.insert(word.clone(), id as u32).is_some() {
                return Err(Error::parse("vocabulary", id, format!("duplicate word {word:?}")));
            }
            words.push(word);
            counts.push(count);
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Keep only the words accepted by `keep`, preserving relative order.
    pub fn retain(&self, mut keep: impl FnMut(&str) -> bool) -> Self {
        let pairs = self
            .words
            .iter()
            .zip(&self.counts)
            .filter(|(w, _)| keep(w))
            .map(|(w, &c)| (w.clone(), c))
            .collect();
        Self::from_ordered(pairs).expect("subset of a valid vocabulary")
    }

    /// Map a sentence to ids, dropping out-of-vocabulary tokens.
    pub fn encode<W: AsRef<str>>(&self, sentence: &[W]) -> Vec<u32> {
        sentence.iter().filter_map(|w| self.id(w.as_ref())).collect()
    }

    /// `word<TAB>count` rows in id order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, c) in self.words.iter().zip(&self.counts) {
            writeln!(out, "{w}\t{c}").unwrap();
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse("vocabulary", i, "expected word<TAB>count"))?;
            let count: u64 = count
                .parse()
                .map_err(|e| Error::parse("vocabulary", i, format!("bad count: {e}")))?;
            if word.is_empty() {
                return Err(Error::parse("vocabulary", i, "empty word"));
            }
            pairs.push((word.to_string(), count));
        }
        Self::from_ordered(pairs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }
}

/// Count tokens over a stream of sentences and keep words seen at least
/// `min_count` times.
pub fn build_vocabulary<I, S, W>(sentences: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[W]>,
    W: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut tokens = 0usize;
    for sentence in sentences {
        for w in sentence.as_ref() {
            tokens += 1;
            *counts.entry(w.as_ref().to_string()).or_default() += 1;
        }
    }
    if tokens == 0 {
        return Err(Error::Empty("no tokens to build a vocabulary from".into()));
    }
    Vocabulary::from_counts(counts, min_count)
}
