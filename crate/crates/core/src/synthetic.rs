//! Synthetic parallel corpora with known structure, for testing and
//! demonstrations.
//!
//! Verse *content* is a sequence of abstract concepts drawn from a sparse
//! Markov chain and shared by every language. A [`Realization`] turns
//! concepts into words: it may merge concepts into one word, split a
//! concept between two synonyms, and attach class particles. Languages of
//! one family are small perturbations of a common realization.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ParallelCorpus, Sentence};
use crate::error::Result;

/// Concept sequences shared by all languages of a synthetic corpus.
#[derive(Clone, Debug)]
pub struct Content {
    pub concepts: usize,
    pub verses: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct ContentParams {
    pub concepts: usize,
    pub verses: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Preferred successors per concept.
    pub successors: usize,
    /// Probability of jumping to a frequency-weighted random concept.
    pub jump: f64,
}

impl Default for ContentParams {
    fn default() -> Self {
        ContentParams {
            concepts: 200,
            verses: 2000,
            min_len: 8,
            max_len: 16,
            successors: 4,
            jump: 0.2,
        }
    }
}

/// Zipf-like weights `1 / (rank + 2)`.
fn zipf(n: usize) -> Vec<f64> {
    (0..n).map(|r| 1.0 / (r as f64 + 2.0)).collect()
}

fn pick(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        x -= w;
        if x < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

impl Content {
    pub fn generate(params: &ContentParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = params.concepts;
        let unigram = zipf(n);
        let successors: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..params.successors).map(|_| pick(&unigram, &mut rng)).collect())
            .collect();
        let succ_weights = zipf(params.successors);
        let verses = (0..params.verses)
            .map(|_| {
                let len = rng.random_range(params.min_len..=params.max_len);
                let mut verse = Vec::with_capacity(len);
                let mut cur = pick(&unigram, &mut rng);
                verse.push(cur);
                while verse.len() < len {
                    cur = if rng.random::<f64>() < params.jump {
                        pick(&unigram, &mut rng)
                    } else {
                        successors[cur][pick(&succ_weights, &mut rng)]
                    };
                    verse.push(cur);
                }
                verse
            })
            .collect();
        Content { concepts: n, verses }
    }

    pub fn token_count(&self) -> usize {
        self.verses.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Debug)]
pub struct RealizationParams {
    /// Fraction of concepts sharing their word with another concept.
    pub merge: f64,
    /// Fraction of concepts realized by two alternating synonyms.
    pub synonyms: f64,
    /// Number of particle classes; 0 disables particles.
    pub particle_classes: usize,
    /// Fraction of concepts followed by their class particle.
    pub particle_rate: f64,
}

impl Default for RealizationParams {
    fn default() -> Self {
        RealizationParams {
            merge: 0.1,
            synonyms: 0.05,
            particle_classes: 6,
            particle_rate: 0.6,
        }
    }
}

/// Concept → word rules of one language.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    /// Word index of each concept (merged concepts share one).
    word: Vec<usize>,
    /// Alternative word index used for every other occurrence.
    synonym: Vec<Option<usize>>,
    /// Particle emitted after the concept.
    particle: Vec<Option<usize>>,
}

impl Realization {
    /// One word per concept, no particles.
    pub fn identity(concepts: usize) -> Self {
        Realization {
            word: (0..concepts).collect(),
            synonym: vec![None; concepts],
            particle: vec![None; concepts],
        }
    }

    pub fn random(concepts: usize, params: &RealizationParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = Realization::identity(concepts);
        for c in 0..concepts {
            r.redraw(c, params, &mut rng);
        }
        r
    }

    fn redraw(&mut self, c: usize, params: &RealizationParams, rng: &mut impl Rng) {
        let n = self.word.len();
        self.word[c] = if rng.random::<f64>() < params.merge {
            self.word[rng.random_range(0..n)]
        } else {
            c
        };
        self.synonym[c] = (rng.random::<f64>() < params.synonyms).then_some(n + c);
        self.particle[c] = (params.particle_classes > 0 && rng.random::<f64>() < params.particle_rate)
            .then(|| rng.random_range(0..params.particle_classes));
    }

    /// Copy with a fraction of concepts redrawn.
    pub fn perturbed(&self, fraction: f64, params: &RealizationParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = self.clone();
        for c in 0..self.word.len() {
            if rng.random::<f64>() < fraction {
                r.redraw(c, params, &mut rng);
            }
        }
        r
    }

    /// Spell a verse with words `{prefix}{index}` and particles `{prefix}p{class}`.
    pub fn realize(&self, verse: &[usize], prefix: &str, verse_index: usize) -> Sentence {
        let mut out = Vec::with_capacity(verse.len() * 2);
        for (pos, &c) in verse.iter().enumerate() {
            let word = match self.synonym[c] {
                Some(alt) if (verse_index + pos) % 2 == 1 => alt,
                _ => self.word[c],
            };
            out.push(format!("{prefix}{word}"));
            if let Some(p) = self.particle[c] {
                out.push(format!("{prefix}p{p}"));
            }
        }
        out
    }

    pub fn realize_all(&self, content: &Content, prefix: &str) -> Vec<Sentence> {
        content
            .verses
            .iter()
            .enumerate()
            .map(|(i, v)| self.realize(v, prefix, i))
            .collect()
    }
}

/// Rename every token by prepending `prefix`. Prepending preserves the
/// lexicographic order of tokens, so vocabulary ids are unchanged.
pub fn rename(sentences: &[Sentence], prefix: &str) -> Vec<Sentence> {
    sentences
        .iter()
        .map(|s| s.iter().map(|w| format!("{prefix}{w}")).collect())
        .collect()
}

/// Shuffle the token order inside a `fraction` of the verses.
pub fn shuffle_verses(sentences: &[Sentence], fraction: f64, seed: u64) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sentences
        .iter()
        .map(|s| {
            let mut s = s.clone();
            if rng.random::<f64>() < fraction {
                s.shuffle(&mut rng);
            }
            s
        })
        .collect()
}

/// Assemble a parallel corpus with verse ids `v0, v1, ...`.
pub fn parallel_corpus(languages: Vec<(String, Vec<Sentence>)>) -> Result<ParallelCorpus> {
    let langs = languages
        .into_iter()
        .map(|(name, sents)| {
            let verses = sents
                .into_iter()
                .enumerate()
                .map(|(i, s)| (format!("v{i}"), s))
                .collect();
            (name, verses)
        })
        .collect();
    ParallelCorpus::from_languages(langs).map(|(c, _)| c)
}

/// A corpus of `families × per_family` languages. Each family draws its own
/// realization; members perturb it by `perturbation`. Languages are named
/// `f{family}l{member}`.
pub fn family_corpus(
    content: &Content,
    families: usize,
    per_family: usize,
    params: &RealizationParams,
    perturbation: f64,
    seed: u64,
) -> Vec<(String, Vec<Sentence>)> {
    let mut out = Vec::new();
    for f in 0..families {
        let base = Realization::random(content.concepts, params, seed.wrapping_mul(1000).wrapping_add(f as u64));
        for m in 0..per_family {
            let lang = format!("f{f}l{m}");
            let member_seed = seed.wrapping_mul(1000).wrapping_add(100 + (f * per_family + m) as u64);
            let r = base.perturbed(perturbation, params, member_seed);
            out.push((lang.clone(), r.realize_all(content, &format!("{lang}w"))));
        }
    }
    out
}
