//! Corpus ingestion: verse-aligned parallel text, coding-region datasets,
//! tokenization and vocabularies.

mod genome;
mod tokenize;
mod vocab;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use genome::{
    genome_ngram_sentences, load_coding_regions, ngram_token_count, parse_fasta, parse_genome_tsv,
    validate_dna, CodingRegionSet, GenomeFormat, InvalidBasePolicy, MAX_NGRAM, MIN_NGRAM,
};
pub(crate) use genome::ngram_offsets;
pub use tokenize::{tokenize_natural, tokenize_with, PunctuationMode};
pub use vocab::{build_vocabulary, Vocabulary};

pub type Sentence = Vec<String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    /// One `<lang>.tsv` file per language, rows `verse_id<TAB>text`.
    Tsv,
    /// One `<lang>.xml` file per language with `<seg id=".." type="verse">` elements.
    BibleXml,
}

impl CorpusFormat {
    fn extension(self) -> &'static str {
        match self {
            CorpusFormat::Tsv => "tsv",
            CorpusFormat::BibleXml => "xml",
        }
    }
}

/// Verse-aligned corpus in which every verse exists in every language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelCorpus {
    languages: Vec<String>,
    verse_ids: Vec<String>,
    /// `texts[lang][verse]`
    texts: Vec<Vec<Sentence>>,
}

/// Per-language number of verses dropped by the intersection.
pub type DroppedVerses = BTreeMap<String, usize>;

impl ParallelCorpus {
    /// Build from per-language verse maps, keeping only verse ids present
    /// (and non-empty) in all languages. Verse order follows the first
    /// language's order.
    pub fn from_languages(
        languages: Vec<(String, Vec<(String, Sentence)>)>,
    ) -> Result<(Self, DroppedVerses)> {
        if languages.is_empty() {
            return Err(Error::Load("no languages given".into()));
        }
        for (lang, verses) in &languages {
            if verses.iter().all(|(_, s)| s.is_empty()) {
                return Err(Error::Load(format!("language {lang:?} has no verses")));
            }
        }
        let sets: Vec<HashSet<&str>> = languages
            .iter()
            .map(|(_, verses)| {
                verses
                    .iter()
                    .filter(|(_, s)| !s.is_empty())
                    .map(|(id, _)| id.as_str())
                    .collect()
            })
            .collect();
        let verse_ids: Vec<String> = languages[0]
            .1
            .iter()
            .map(|(id, _)| id)
            .filter(|id| sets.iter().all(|set| set.contains(id.as_str())))
            .cloned()
            .collect();
        if verse_ids.is_empty() {
            return Err(Error::Load(format!(
                "language {:?} has zero verses shared with all other languages",
                languages[0].0
            )));
        }
        let mut dropped = DroppedVerses::new();
        let mut names = Vec::with_capacity(languages.len());
        let mut texts = Vec::with_capacity(languages.len());
        for (lang, verses) in languages {
            let total = verses.len();
            let mut by_id: HashMap<String, Sentence> = verses.into_iter().collect();
            let ordered: Vec<Sentence> = verse_ids
                .iter()
                .map(|id| by_id.remove(id).expect("id in intersection"))
                .collect();
            dropped.insert(lang.clone(), total - ordered.len());
            names.push(lang);
            texts.push(ordered);
        }
        Ok((
            ParallelCorpus {
                languages: names,
                verse_ids,
                texts,
            },
            dropped,
        ))
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn verse_ids(&self) -> &[String] {
        &self.verse_ids
    }

    pub fn len(&self) -> usize {
        self.verse_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verse_ids.is_empty()
    }

    pub fn language_index(&self, lang: &str) -> Option<usize> {
        self.languages.iter().position(|l| l == lang)
    }

    /// Token sequences of one language, in verse order.
    pub fn sentences(&self, lang: &str) -> Result<&[Sentence]> {
        let i = self
            .language_index(lang)
            .ok_or_else(|| Error::Load(format!("language {lang:?} not in corpus")))?;
        Ok(&self.texts[i])
    }

    pub fn verse(&self, verse_id: &str, lang: &str) -> Option<&Sentence> {
        let l = self.language_index(lang)?;
        let v = self.verse_ids.iter().position(|id| id == verse_id)?;
        Some(&self.texts[l][v])
    }

    /// Keep a subset of languages, in the given order.
    pub fn select(&self, languages: &[String]) -> Result<Self> {
        let mut texts = Vec::new();
        for lang in languages {
            texts.push(self.sentences(lang)?.to_vec());
        }
        Ok(ParallelCorpus {
            languages: languages.to_vec(),
            verse_ids: self.verse_ids.clone(),
            texts,
        })
    }

    /// Write one tokenized `<lang>.tsv` per language into `dir`.
    pub fn write_tsv_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths = Vec::new();
        for (lang, verses) in self.languages.iter().zip(&self.texts) {
            let mut out = String::new();
            for (id, toks) in self.verse_ids.iter().zip(verses) {
                out.push_str(id);
                out.push('\t');
                out.push_str(&toks.join(" "));
                out.push('\n');
            }
            let path = dir.join(format!("{lang}.tsv"));
            fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// Parse `verse_id<TAB>text` rows, tokenizing each text.
pub fn parse_verse_tsv(text: &str, mode: PunctuationMode) -> Result<Vec<(String, Sentence)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse("verse tsv", i, "expected verse_id<TAB>text"))?;
        if id.is_empty() {
            return Err(Error::parse("verse tsv", i, "empty verse id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::parse("verse tsv", i, format!("duplicate verse id {id:?}")));
        }
        out.push((id.to_string(), tokenize_with(body, mode)));
    }
    Ok(out)
}

/// Parse the `<seg id=".." type="verse">text</seg>` elements of a bible XML file.
pub fn parse_bible_xml(text: &str, mode: PunctuationMode) -> Result<Vec<(String, Sentence)>> {
    let mut reader = Reader::from_str(text);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut current: Option<(String, String)> = None;
    let mut index = 0usize;
    loop {
        let event = reader
            .read_event()
            .map_err(|e| Error::parse("bible xml", index, e.to_string()))?;
        match event {
            Event::Start(e) if e.name().as_ref() == b"seg" => {
                let mut id = None;
                let mut is_verse = true;
                for attr in e.attributes() {
                    let attr = attr.map_err(|e| Error::parse("bible xml", index, e.to_string()))?;
                    let value = attr
                        .unescape_value()
                        .map_err(|e| Error::parse("bible xml", index, e.to_string()))?;
                    match attr.key.as_ref() {
                        b"id" => id = Some(value.into_owned()),
                        b"type" => is_verse = value == "verse",
                        _ => {}
                    }
                }
                if is_verse {
                    let id = id.ok_or_else(|| Error::parse("bible xml", index, "seg without id"))?;
                    current = Some((id, String::new()));
                }
            }
            Event::Text(t) => {
                if let Some((_, body)) = current.as_mut() {
                    let s = t
                        .unescape()
                        .map_err(|e| Error::parse("bible xml", index, e.to_string()))?;
                    body.push_str(&s);
                }
            }
            Event::CData(t) => {
                if let Some((_, body)) = current.as_mut() {
                    body.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::End(e) if e.name().as_ref() == b"seg" => {
                if let Some((id, body)) = current.take() {
                    if !seen.insert(id.clone()) {
                        return Err(Error::parse("bible xml", index, format!("duplicate verse id {id:?}")));
                    }
                    out.push((id, tokenize_with(&body, mode)));
                    index += 1;
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

/// Load a directory with one file per language (file stem = language id)
/// and intersect verse ids across languages.
pub fn load_verse_aligned(
    dir: &Path,
    format: CorpusFormat,
    mode: PunctuationMode,
) -> Result<(ParallelCorpus, DroppedVerses)> {
    if !dir.is_dir() {
        return Err(Error::Load(format!("corpus directory {} not found", dir.display())));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == format.extension()))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Load(format!(
            "no *.{} files in {}",
            format.extension(),
            dir.display()
        )));
    }
    let languages = files
        .iter()
        .map(|path| {
            let lang = path.file_stem().unwrap().to_string_lossy().into_owned();
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let verses = match format {
                CorpusFormat::Tsv => parse_verse_tsv(&text, mode),
                CorpusFormat::BibleXml => parse_bible_xml(&text, mode),
            }
            .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
            Ok((lang, verses))
        })
        .collect::<Result<Vec<_>>>()?;
    let (corpus, dropped) = ParallelCorpus::from_languages(languages)?;
    for (lang, n) in &dropped {
        log::info!("{lang}: {n} verses dropped by intersection");
    }
    Ok((corpus, dropped))
}
