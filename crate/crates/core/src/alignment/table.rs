use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

use super::model1::TranslationModel;

/// One language's thresholded pivot → target mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct LanguageAlignment {
    pub language: String,
    /// `(pivot, target, score)` in pivot order (descending pivot frequency).
    pub entries: Vec<(String, String, f64)>,
}

impl LanguageAlignment {
    /// Every pivot word mapped to itself with score 1.
    pub fn identity(language: &str, pivot_vocab: &Vocabulary) -> Self {
        LanguageAlignment {
            language: language.to_string(),
            entries: pivot_vocab
                .words()
                .iter()
                .map(|w| (w.clone(), w.clone(), 1.0))
                .collect(),
        }
    }
}

/// For each pivot word, emit the most probable target if its probability is
/// at least `threshold`. Ties prefer the more frequent target, then the
/// lexicographically smaller one. NULL is never a candidate.
pub fn extract_alignment(model: &TranslationModel, language: &str, threshold: f64) -> Result<LanguageAlignment> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Config(format!("threshold {threshold} outside (0, 1]")));
    }
    let targets = model.target_vocab();
    let mut entries = Vec::new();
    for pivot_id in 0..model.pivot_vocab().len() as u32 {
        let best = model.row(pivot_id).iter().copied().max_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap()
                .then_with(|| targets.count(a.0).cmp(&targets.count(b.0)))
                .then_with(|| targets.word(b.0).cmp(targets.word(a.0)))
        });
        if let Some((target, p)) = best {
            if p >= threshold {
                entries.push((
                    model.pivot_vocab().word(pivot_id).to_string(),
                    targets.word(target).to_string(),
                    p,
                ));
            }
        }
    }
    Ok(LanguageAlignment {
        language: language.to_string(),
        entries,
    })
}

/// Pivot words with one target word (and score) per language.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentTable {
    pivot_words: Vec<String>,
    languages: Vec<String>,
    /// `entries[lang][pivot]`; `None` where a partial table has no row.
    entries: Vec<Vec<Option<(String, f64)>>>,
}

impl AlignmentTable {
    pub fn pivot_words(&self) -> &[String] {
        &self.pivot_words
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.pivot_words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivot_words.is_empty()
    }

    fn language_index(&self, language: &str) -> Option<usize> {
        self.languages.iter().position(|l| l == language)
    }

    pub fn get(&self, pivot_index: usize, language: &str) -> Option<(&str, f64)> {
        let l = self.language_index(language)?;
        self.entries[l][pivot_index].as_ref().map(|(w, s)| (w.as_str(), *s))
    }

    /// Target words of one language in pivot order; `None` where missing.
    pub fn targets(&self, language: &str) -> Result<Vec<Option<&str>>> {
        let l = self
            .language_index(language)
            .ok_or_else(|| Error::Alignment(format!("language {language:?} not in alignment table")))?;
        Ok(self.entries[l].iter().map(|e| e.as_ref().map(|(w, _)| w.as_str())).collect())
    }

    /// Whether every pivot word has an entry for every language.
    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(|col| col.iter().all(Option::is_some))
    }

    /// Keep the pivot positions accepted by `keep`, preserving order.
    pub fn retain_pivots(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let kept: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        AlignmentTable {
            pivot_words: kept.iter().map(|&i| self.pivot_words[i].clone()).collect(),
            languages: self.languages.clone(),
            entries: self
                .entries
                .iter()
                .map(|col| kept.iter().map(|&i| col[i].clone()).collect())
                .collect(),
        }
    }

    /// Restrict to `languages` (in that order) and to pivots present in all of them.
    pub fn restrict(&self, languages: &[String]) -> Result<Self> {
        let mut entries = Vec::with_capacity(languages.len());
        for lang in languages {
            let l = self
                .language_index(lang)
                .ok_or_else(|| Error::Alignment(format!("language {lang:?} not in alignment table")))?;
            entries.push(self.entries[l].clone());
        }
        let sub = AlignmentTable {
            pivot_words: self.pivot_words.clone(),
            languages: languages.to_vec(),
            entries,
        };
        Ok(sub.retain_pivots(|i| sub.entries.iter().all(|col| col[i].is_some())))
    }

    /// Identity mapping over `words` for every language.
    pub fn identity(words: &[String], languages: &[String]) -> Self {
        AlignmentTable {
            pivot_words: words.to_vec(),
            languages: languages.to_vec(),
            entries: languages
                .iter()
                .map(|_| words.iter().map(|w| Some((w.clone(), 1.0))).collect())
                .collect(),
        }
    }

    /// `pivot<TAB>language<TAB>target<TAB>score`, by pivot order then language.
    pub fn to_tsv(&self) -> String {
        let mut order: Vec<usize> = (0..self.languages.len()).collect();
        order.sort_by(|&a, &b| self.languages[a].cmp(&self.languages[b]));
        let mut out = String::new();
        for (p, pivot) in self.pivot_words.iter().enumerate() {
            for &l in &order {
                if let Some((target, score)) = &self.entries[l][p] {
                    writeln!(out, "{pivot}\t{}\t{target}\t{score:?}", self.languages[l]).unwrap();
                }
            }
        }
        out
    }

    /// Parse the TSV format. Pivot order is first appearance; languages are
    /// sorted. Tables from external aligners load the same way.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut pivot_index: HashMap<String, usize> = HashMap::new();
        let mut pivot_words = Vec::new();
        let mut rows: BTreeMap<String, HashMap<usize, (String, f64)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [pivot, lang, target, score] = cols[..] else {
                return Err(Error::parse("alignment table", i, "expected 4 tab-separated columns"));
            };
            if pivot.is_empty() || lang.is_empty() || target.is_empty() {
                return Err(Error::parse("alignment table", i, "empty field"));
            }
            let score: f64 = score
                .parse()
                .map_err(|e| Error::parse("alignment table", i, format!("bad score: {e}")))?;
            if !score.is_finite() {
                return Err(Error::parse("alignment table", i, "score is not finite"));
            }
            let p = *pivot_index.entry(pivot.to_string()).or_insert_with(|| {
                pivot_words.push(pivot.to_string());
                pivot_words.len() - 1
            });
            let column = rows.entry(lang.to_string()).or_default();
            if column.insert(p, (target.to_string(), score)).is_some() {
                return Err(Error::parse(
                    "alignment table",
                    i,
                    format!("duplicate row for pivot {pivot:?} and language {lang:?}"),
                ));
            }
        }
        let languages: Vec<String> = rows.keys().cloned().collect();
        let entries = rows
            .into_values()
            .map(|mut col| (0..pivot_words.len()).map(|p| col.remove(&p)).collect())
            .collect();
        Ok(AlignmentTable {
            pivot_words,
            languages,
            entries,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }
}

/// Keep the pivot words aligned in every requested language. Pivot order
/// follows the first language's entries (descending pivot frequency).
pub fn intersect_tables(per_language: &[LanguageAlignment], languages: &[String]) -> Result<AlignmentTable> {
    if languages.is_empty() {
        return Err(Error::Alignment("no languages to intersect".into()));
    }
    let mut lookups = Vec::with_capacity(languages.len());
    for lang in languages {
        let alignment = per_language
            .iter()
            .find(|a| &a.language == lang)
            .ok_or_else(|| Error::Alignment(format!("no alignment entries for language {lang:?}")))?;
        let map: HashMap<&str, (&str, f64)> = alignment
            .entries
            .iter()
            .map(|(p, t, s)| (p.as_str(), (t.as_str(), *s)))
            .collect();
        lookups.push((alignment, map));
    }
    let mut seen = HashSet::new();
    let pivot_words: Vec<String> = lookups[0]
        .0
        .entries
        .iter()
        .map(|(p, _, _)| p)
        .filter(|p| seen.insert(p.as_str()))
        .filter(|p| lookups.iter().all(|(_, map)| map.contains_key(p.as_str())))
        .cloned()
        .collect();
    if pivot_words.is_empty() {
        return Err(Error::Alignment(format!(
            "no pivot word is aligned in all of {languages:?}"
        )));
    }
    let entries = lookups
        .iter()
        .map(|(_, map)| {
            pivot_words
                .iter()
                .map(|p| map.get(p.as_str()).map(|&(t, s)| (t.to_string(), s)))
                .collect()
        })
        .collect();
    Ok(AlignmentTable {
        pivot_words,
        languages: languages.to_vec(),
        entries,
    })
}
