//! Criterion 4: EM monotonicity and bijection recovery.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weld::alignment::{extract_alignment, train_translation_model};
use weld::corpus::Sentence;
use weld::synthetic::{parallel_corpus, Content, ContentParams, Realization};

use crate::Outcome;

fn random_toy_corpus(rng: &mut impl Rng) -> Vec<(String, Vec<Sentence>)> {
    let verses = rng.random_range(5..40);
    let src_words = rng.random_range(2..12);
    let tgt_words = rng.random_range(2..12);
    let side = |prefix: &str, words: usize, rng: &mut dyn rand::RngCore| -> Vec<Sentence> {
        (0..verses)
            .map(|_| {
                let len = rng.random_range(1..8);
                (0..len).map(|_| format!("{prefix}{}", rng.random_range(0..words))).collect()
            })
            .collect()
    };
    let a = side("s", src_words, rng);
    let b = side("t", tgt_words, rng);
    vec![("src".into(), a), ("tgt".into(), b)]
}

fn monotone_runs() -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut worst_drop = 0.0f64;
    for _ in 0..100 {
        let corpus = parallel_corpus(random_toy_corpus(&mut rng)).unwrap();
        let model = train_translation_model(&corpus, "src", "tgt", 20, 1).unwrap();
        let ll = model.log_likelihood();
        for w in ll.windows(2) {
            let drop = w[0] - w[1];
            // Allow floating-point noise relative to the magnitude.
            if drop > 1e-9 * w[0].abs().max(1.0) {
                violations += 1;
            }
            worst_drop = worst_drop.max(drop);
        }
    }
    (violations, worst_drop)
}

/// Returns (precision, recall over pivot words with frequency >= 10).
fn bijection_run(seed: u64) -> (f64, f64) {
    let content = Content::generate(
        &ContentParams {
            concepts: 200,
            verses: 2000,
            ..ContentParams::default()
        },
        seed,
    );
    let pivot = Realization::identity(content.concepts).realize_all(&content, "p");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1);
    let mut perm: Vec<usize> = (0..content.concepts).collect();
    perm.shuffle(&mut rng);
    let truth: HashMap<String, String> = (0..content.concepts)
        .map(|i| (format!("p{i}"), format!("q{}", perm[i])))
        .collect();
    let target: Vec<Sentence> = pivot
        .iter()
        .map(|s| {
            let mut t: Sentence = s.iter().map(|w| truth[w].clone()).collect();
            t.shuffle(&mut rng);
            t
        })
        .collect();
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for w in pivot.iter().flatten() {
        *freq.entry(w).or_default() += 1;
    }
    let corpus = parallel_corpus(vec![("P".into(), pivot.clone()), ("Q".into(), target)]).unwrap();
    let model = train_translation_model(&corpus, "P", "Q", 10, 1).unwrap();
    let aligned = extract_alignment(&model, "Q", 0.5).unwrap();
    let correct = aligned.entries.iter().filter(|(p, t, _)| truth[p] == *t).count();
    let precision = if aligned.entries.is_empty() { 0.0 } else { correct as f64 / aligned.entries.len() as f64 };
    let frequent: Vec<&str> = freq.iter().filter(|(_, &c)| c >= 10).map(|(w, _)| *w).collect();
    let found: HashMap<&str, &str> = aligned.entries.iter().map(|(p, t, _)| (p.as_str(), t.as_str())).collect();
    let recalled = frequent.iter().filter(|w| found.get(**w) == Some(&truth[**w].as_str())).count();
    (precision, recalled as f64 / frequent.len() as f64)
}

pub fn criterion_4() -> Outcome {
    let (violations, worst_drop) = monotone_runs();
    let runs: Vec<(f64, f64)> = (0..3).map(bijection_run).collect();
    let min_precision = runs.iter().map(|r| r.0).fold(1.0, f64::min);
    let min_recall = runs.iter().map(|r| r.1).fold(1.0, f64::min);
    Outcome::new(
        violations == 0 && min_precision == 1.0 && min_recall >= 0.95,
        format!(
            "{violations} log-likelihood decreases over 100 toy corpora (max drop {worst_drop:.1e}); bijection precision {min_precision:.4}, recall {min_recall:.4} (min over 3 corpora)"
        ),
    )
}
