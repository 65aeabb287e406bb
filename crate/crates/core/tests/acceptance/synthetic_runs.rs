//! Criteria 5 and 8: end-to-end runs on synthetic corpora.

use rayon::prelude::*;
use weld::alignment::{align_to_pivot, AlignmentConfig, AlignmentTable};
use weld::clustering::upgma;
use weld::corpus::Sentence;
use weld::divergence::{distance_matrix, weld_distance, PivotScope};
use weld::embedding::{train, EmbeddingConfig, EmbeddingModel};
use weld::synthetic::{family_corpus, parallel_corpus, rename, shuffle_verses, Content, ContentParams, Realization, RealizationParams};

use crate::Outcome;

fn embed(sentences: &[Sentence], dim: usize, seed: u64) -> EmbeddingModel<f32> {
    let config = EmbeddingConfig {
        dim,
        window: 5,
        min_count: 5,
        epochs: 5,
        seed,
        ..EmbeddingConfig::natural()
    };
    train(sentences, &config).expect("training succeeds")
}

/// D(A, B) and D(A, C) for one seed.
pub fn separation_run(seed: u64) -> (f64, f64) {
    let content = Content::generate(
        &ContentParams {
            concepts: 300,
            verses: 4200,
            ..ContentParams::default()
        },
        seed,
    );
    let a = Realization::identity(content.concepts).realize_all(&content, "w");
    let b = rename(&a, "b");
    let c = shuffle_verses(&a, 1.0, seed ^ 0x5eed);
    let corpus = parallel_corpus(vec![("A".into(), a.clone()), ("B".into(), b.clone()), ("C".into(), c.clone())]).unwrap();
    let langs: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
    let table = align_to_pivot(&corpus, "A", &langs, &AlignmentConfig::default()).unwrap();
    let models: Vec<EmbeddingModel<f32>> = [&a, &b, &c].par_iter().map(|s| embed(s, 50, seed)).collect();
    let ab: f64 = weld_distance(&models[0], &models[1], &table, "A", "B").unwrap();
    let ac: f64 = weld_distance(&models[0], &models[2], &table, "A", "C").unwrap();
    (ab, ac)
}

pub fn criterion_5() -> Outcome {
    let runs: Vec<(u64, (f64, f64))> = (0..10u64).into_par_iter().map(|s| (s, separation_run(s))).collect();
    let exact_zero = runs.iter().all(|(_, (ab, _))| *ab == 0.0);
    let separated = runs.iter().filter(|(_, (ab, ac))| ab < ac).count();
    let detail = format!(
        "D(A,B)==0 in all runs: {exact_zero}; D(A,B) < D(A,C) in {separated}/10 (D(A,C) range {:.3e}..{:.3e})",
        runs.iter().map(|r| r.1 .1).fold(f64::INFINITY, f64::min),
        runs.iter().map(|r| r.1 .1).fold(0.0, f64::max)
    );
    Outcome::new(exact_zero && separated >= 9, detail)
}

/// Run the natural-language pipeline on a 3×3 family corpus and report
/// whether each family is a clade.
pub fn family_run(seed: u64) -> bool {
    let content = Content::generate(
        &ContentParams {
            concepts: 200,
            verses: 3000,
            ..ContentParams::default()
        },
        seed,
    );
    let languages = family_corpus(&content, 3, 3, &RealizationParams::default(), 0.05, seed);
    let names: Vec<String> = languages.iter().map(|(l, _)| l.clone()).collect();
    let models: Vec<EmbeddingModel<f32>> = languages
        .par_iter()
        .map(|(_, s)| embed(s, 30, seed))
        .collect();
    let corpus = parallel_corpus(languages).unwrap();
    let table: AlignmentTable = align_to_pivot(&corpus, &names[0], &names, &AlignmentConfig::default()).unwrap();
    let refs: Vec<(&str, &EmbeddingModel<f32>)> = names.iter().map(String::as_str).zip(&models).collect();
    let matrix = distance_matrix::<f32, f64>(&refs, &table, PivotScope::Global).unwrap();
    let tree = upgma(&matrix).unwrap();
    (0..3).all(|f| {
        let group: Vec<String> = (0..3).map(|m| format!("f{f}l{m}")).collect();
        let group: Vec<&str> = group.iter().map(String::as_str).collect();
        tree.is_monophyletic(&group)
    })
}

pub fn criterion_8() -> Outcome {
    let results: Vec<bool> = (0..10u64).into_par_iter().map(family_run).collect();
    let ok = results.iter().filter(|&&b| b).count();
    Outcome::new(ok >= 8, format!("families recovered as clades in {ok}/10 seeded runs"))
}
