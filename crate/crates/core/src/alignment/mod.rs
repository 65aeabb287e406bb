//! Word alignment between each language and a pivot language.

mod model1;
mod table;

pub use model1::{train_translation_model, TranslationModel};
pub use table::{extract_alignment, intersect_tables, AlignmentTable, LanguageAlignment};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_vocabulary, ParallelCorpus};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentConfig {
    /// Minimum `p(target | pivot)` for an entry to be kept.
    pub threshold: f64,
    pub iterations: usize,
    /// Words rarer than this in their language are not aligned.
    pub min_count: u64,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        AlignmentConfig {
            threshold: 0.5,
            iterations: 10,
            min_count: 5,
        }
    }
}

/// Align every language against `pivot` and keep the pivot words aligned
/// in all of them. The pivot language maps each word to itself.
pub fn align_to_pivot(
    corpus: &ParallelCorpus,
    pivot: &str,
    languages: &[String],
    config: &AlignmentConfig,
) -> Result<AlignmentTable> {
    let pivot_vocab = build_vocabulary(corpus.sentences(pivot)?, config.min_count)?;
    if pivot_vocab.is_empty() {
        return Err(Error::Alignment(format!(
            "pivot {pivot:?} has no word with count >= {}",
            config.min_count
        )));
    }
    let per_language: Vec<LanguageAlignment> = languages
        .par_iter()
        .map(|lang| {
            if lang == pivot {
                return Ok(LanguageAlignment::identity(pivot, &pivot_vocab));
            }
            let model = train_translation_model(corpus, pivot, lang, config.iterations, config.min_count)?;
            let alignment = extract_alignment(&model, lang, config.threshold)?;
            log::info!(
                "{pivot} -> {lang}: {} of {} pivot words aligned",
                alignment.entries.len(),
                model.pivot_vocab().len()
            );
            Ok(alignment)
        })
        .collect::<Result<_>>()?;
    let mut order = vec![pivot.to_string()];
    order.extend(languages.iter().filter(|l| *l != pivot).cloned());
    let mut all = per_language;
    if !languages.iter().any(|l| l == pivot) {
        all.push(LanguageAlignment::identity(pivot, &pivot_vocab));
    }
    let table = intersect_tables(&all, &order)?;
    table.restrict(languages)
}
