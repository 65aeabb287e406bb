//! Lexical translation model trained by expectation maximization over
//! verse pairs, with a NULL source word absorbing unaligned targets.

use std::collections::HashMap;

use crate::corpus::{build_vocabulary, ParallelCorpus, Vocabulary};
use crate::error::{Error, Result};

/// Row index of the NULL pivot token in the probability table.
const NULL: u32 = 0;

/// Conditional probabilities `p(target | pivot)`.
#[derive(Clone, Debug)]
pub struct TranslationModel {
    pivot_vocab: Vocabulary,
    target_vocab: Vocabulary,
    /// `rows[0]` is NULL; `rows[i + 1]` belongs to pivot id `i`.
    rows: Vec<Vec<(u32, f64)>>,
    log_likelihood: Vec<f64>,
}

impl TranslationModel {
    pub fn pivot_vocab(&self) -> &Vocabulary {
        &self.pivot_vocab
    }

    pub fn target_vocab(&self) -> &Vocabulary {
        &self.target_vocab
    }

    /// Corpus log-likelihood of the initial parameters followed by one entry
    /// per EM iteration.
    pub fn log_likelihood(&self) -> &[f64] {
        &self.log_likelihood
    }

    /// `p(target | pivot)`; zero for pairs that never co-occur.
    pub fn prob(&self, pivot: &str, target: &str) -> f64 {
        match (self.pivot_vocab.id(pivot), self.target_vocab.id(target)) {
            (Some(p), Some(t)) => self.rows[p as usize + 1]
                .iter()
                .find(|(id, _)| *id == t)
                .map_or(0.0, |&(_, pr)| pr),
            _ => 0.0,
        }
    }

    /// Distribution over target ids for a pivot id, sorted by target id.
    pub fn row(&self, pivot_id: u32) -> &[(u32, f64)] {
        &self.rows[pivot_id as usize + 1]
    }

    pub fn null_row(&self) -> &[(u32, f64)] {
        &self.rows[NULL as usize]
    }
}

/// Verse pairs as id sequences with the flattened pair-index layout used by
/// the EM passes.
struct Bitext {
    /// Per verse: pivot ids (with NULL at position 0, pivot ids shifted by 1)
    /// and target ids.
    verses: Vec<(Vec<u32>, Vec<u32>)>,
    /// Per verse, for every (target j, source i), the index of the pair
    /// parameter; row-major by target position.
    pair_index: Vec<Vec<u32>>,
    /// Source row and target id of each pair parameter.
    pair_source: Vec<u32>,
    pair_target: Vec<u32>,
}

impl Bitext {
    fn new(verses: Vec<(Vec<u32>, Vec<u32>)>) -> Self {
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pair_source = Vec::new();
        let mut pair_target = Vec::new();
        let pair_index = verses
            .iter()
            .map(|(src, tgt)| {
                let mut idx = Vec::with_capacity(src.len() * tgt.len());
                for &f in tgt {
                    for &e in src {
                        let next = ids.len() as u32;
                        let id = *ids.entry((e, f)).or_insert_with(|| {
                            pair_source.push(e);
                            pair_target.push(f);
                            next
                        });
                        idx.push(id);
                    }
                }
                idx
            })
            .collect();
        Bitext {
            verses,
            pair_index,
            pair_source,
            pair_target,
        }
    }
}

/// Train `p(target | pivot)` for one language pair of a parallel corpus.
///
/// Tokens below `min_count` in their language are ignored. Parameters start
/// uniform over the target vocabulary.
pub fn train_translation_model(
    corpus: &ParallelCorpus,
    pivot: &str,
    target: &str,
    iterations: usize,
    min_count: u64,
) -> Result<TranslationModel> {
    if iterations == 0 {
        return Err(Error::Config("EM iterations must be >= 1".into()));
    }
    let pivot_sents = corpus.sentences(pivot)?;
    let target_sents = corpus.sentences(target)?;
    let pivot_vocab = build_vocabulary(pivot_sents, min_count)?;
    let target_vocab = build_vocabulary(target_sents, min_count)?;
    let verses: Vec<(Vec<u32>, Vec<u32>)> = pivot_sents
        .iter()
        .zip(target_sents)
        .map(|(p, t)| {
            let mut src = vec![NULL];
            src.extend(pivot_vocab.encode(p).into_iter().map(|id| id + 1));
            (src, target_vocab.encode(t))
        })
        .filter(|(src, tgt)| src.len() > 1 && !tgt.is_empty())
        .collect();
    if verses.is_empty() {
        return Err(Error::Alignment(format!(
            "no verse has in-vocabulary tokens in both {pivot:?} and {target:?}"
        )));
    }
    Ok(run_em(pivot_vocab, target_vocab, Bitext::new(verses), iterations))
}

fn run_em(
    pivot_vocab: Vocabulary,
    target_vocab: Vocabulary,
    bitext: Bitext,
    iterations: usize,
) -> TranslationModel {
    let n_rows = pivot_vocab.len() + 1;
    let uniform = 1.0 / target_vocab.len() as f64;
    let mut t = vec![uniform; bitext.pair_source.len()];
    let mut counts = vec![0.0f64; t.len()];
    let mut row_totals = vec![0.0f64; n_rows];
    let mut log_likelihood = Vec::with_capacity(iterations + 1);

    for _ in 0..iterations {
        counts.iter_mut().for_each(|c| *c = 0.0);
        let ll = expectation(&bitext, &t, Some(&mut counts));
        log_likelihood.push(ll);
        row_totals.iter_mut().for_each(|x| *x = 0.0);
        for (c, &e) in counts.iter().zip(&bitext.pair_source) {
            row_totals[e as usize] += c;
        }
        for ((ti, &c), &e) in t.iter_mut().zip(&counts).zip(&bitext.pair_source) {
            *ti = c / row_totals[e as usize];
        }
    }
    log_likelihood.push(expectation(&bitext, &t, None));

    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_rows];
    for ((&e, &f), &p) in bitext.pair_source.iter().zip(&bitext.pair_target).zip(&t) {
        if p > 0.0 {
            rows[e as usize].push((f, p));
        }
    }
    for row in &mut rows {
        row.sort_unstable_by_key(|&(f, _)| f);
    }
    TranslationModel {
        pivot_vocab,
        target_vocab,
        rows,
        log_likelihood,
    }
}

/// Corpus log-likelihood under `t`; accumulates expected counts when given.
fn expectation(bitext: &Bitext, t: &[f64], mut counts: Option<&mut Vec<f64>>) -> f64 {
    let mut ll = 0.0;
    for ((src, tgt), idx) in bitext.verses.iter().zip(&bitext.pair_index) {
        let l = src.len();
        for j in 0..tgt.len() {
            let row = &idx[j * l..(j + 1) * l];
            let denom: f64 = row.iter().map(|&k| t[k as usize]).sum();
            ll += (denom / l as f64).ln();
            if let Some(counts) = counts.as_deref_mut() {
                for &k in row {
                    counts[k as usize] += t[k as usize] / denom;
                }
            }
        }
    }
    ll
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize_natural;

    pub(crate) fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
        let mk = |side: usize| {
            pairs
                .iter()
                .enumerate()
                .map(|(i, p)| (format!("v{i}"), tokenize_natural(if side == 0 { p.0 } else { p.1 })))
                .collect::<Vec<_>>()
        };
        ParallelCorpus::from_languages(vec![("P".into(), mk(0)), ("T".into(), mk(1))])
            .unwrap()
            .0
    }

    #[test]
    fn single_candidate() {
        let m = train_translation_model(&corpus(&[("a", "x")]), "P", "T", 1, 1).unwrap();
        assert_eq!(m.prob("a", "x"), 1.0);
    }

    #[test]
    fn two_verse_disambiguation() {
        let c = corpus(&[("a b", "x y"), ("a", "x")]);
        let mut last = 0.0;
        for iters in [1, 2, 5, 20, 100] {
            let m = train_translation_model(&c, "P", "T", iters, 1).unwrap();
            let p = m.prob("a", "x");
            assert!(p >= last - 1e-12, "p(x|a) fell from {last} to {p}");
            last = p;
        }
        assert!(last > 0.95, "p(x|a) = {last}");
    }

    #[test]
    fn hand_computed_first_iterations() {
        // Uniform start t = 1/2 over {x, y}. Verse 1 has sources {NULL, a, b}
        // and targets {x, y}; verse 2 has {NULL, a} and {x}.
        // Iteration 1 counts: c(x|a) = 1/3 + 1/2, c(y|a) = 1/3,
        // so t(x|a) = (5/6) / (7/6) = 5/7.
        let c = corpus(&[("a b", "x y"), ("a", "x")]);
        let m = train_translation_model(&c, "P", "T", 1, 1).unwrap();
        assert!((m.prob("a", "x") - 5.0 / 7.0).abs() < 1e-12);
        assert!((m.prob("b", "x") - 0.5).abs() < 1e-12);
        // Iteration 2 with t(x|a)=5/7, t(y|a)=2/7, t(x|b)=t(y|b)=1/2,
        // t(x|NULL)=5/7, t(y|NULL)=2/7:
        // verse 1, x: denom = 5/7+5/7+1/2 = 27/14, share of a = 10/27;
        //          y: denom = 2/7+2/7+1/2 = 15/14, share of a = 4/15;
        // verse 2, x: denom = 10/7, share of a = 1/2.
        let cx = 10.0 / 27.0 + 0.5;
        let cy = 4.0 / 15.0;
        let m = train_translation_model(&c, "P", "T", 2, 1).unwrap();
        assert!((m.prob("a", "x") - cx / (cx + cy)).abs() < 1e-12);
    }

    #[test]
    fn rows_are_normalized_and_likelihood_rises() {
        let c = corpus(&[
            ("the cat sat", "le chat assis"),
            ("the dog sat", "le chien assis"),
            ("a cat ran", "un chat courut"),
            ("the cat ran", "le chat courut"),
        ]);
        let m = train_translation_model(&c, "P", "T", 15, 1).unwrap();
        for id in 0..m.pivot_vocab().len() as u32 {
            let s: f64 = m.row(id).iter().map(|x| x.1).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
        let s: f64 = m.null_row().iter().map(|x| x.1).sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert_eq!(m.log_likelihood().len(), 16);
        for w in m.log_likelihood().windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{w:?}");
        }
        assert!(m.prob("cat", "chat") > 0.5);
    }

    #[test]
    fn errors() {
        let c = corpus(&[("a", "x")]);
        assert!(train_translation_model(&c, "P", "T", 0, 1).is_err());
        assert!(train_translation_model(&c, "P", "Q", 1, 1).is_err());
        assert!(train_translation_model(&c, "P", "T", 1, 5).is_err());
    }
}
