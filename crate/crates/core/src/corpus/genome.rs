//! Coding-region datasets and their n-gram tokenization.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest and largest supported n-gram length.
pub const MIN_NGRAM: usize = 3;
pub const MAX_NGRAM: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenomeFormat {
    Fasta,
    Tsv,
}

/// What to do with records containing characters outside `{A,C,G,T}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvalidBasePolicy {
    /// Fail on the first offending record.
    #[default]
    Reject,
    /// Uppercase the record; drop it if it still contains other symbols.
    Clean,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodingRegionSet {
    pub organism: String,
    pub sequences: Vec<String>,
    /// Records discarded under [`InvalidBasePolicy::Clean`].
    pub dropped: usize,
}

impl CodingRegionSet {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Total number of n-gram tokens over all offsets of all sequences.
    pub fn ngram_token_count(&self, n: usize) -> u64 {
        self.sequences
            .iter()
            .map(|s| ngram_token_count(s.len(), n))
            .sum()
    }
}

fn is_base(b: u8) -> bool {
    matches!(b, b'A' | b'C' | b'G' | b'T')
}

/// Position of the first non-`ACGT` character, if any.
pub fn validate_dna(seq: &str) -> Result<()> {
    match seq.char_indices().find(|(_, c)| !c.is_ascii() || !is_base(*c as u8)) {
        None => Ok(()),
        Some((position, found)) => Err(Error::InvalidNucleotide { position, found }),
    }
}

/// Closed-form count of grams produced by [`genome_ngram_sentences`]:
/// `sum over o in 0..n of floor((len - o) / n)`.
pub fn ngram_token_count(len: usize, n: usize) -> u64 {
    (0..n.min(len)).map(|o| ((len - o) / n) as u64).sum()
}

/// Split a sequence into non-overlapping `n`-grams at every start offset.
///
/// Sentence `o` holds the consecutive grams starting at offset `o`; leading
/// characters before `o` and any trailing fragment shorter than `n` are
/// dropped. Offsets that yield no gram are omitted.
pub fn genome_ngram_sentences(sequence: &str, n: usize) -> Result<Vec<Vec<String>>> {
    if !(MIN_NGRAM..=MAX_NGRAM).contains(&n) {
        return Err(Error::Config(format!(
            "n-gram length {n} outside {MIN_NGRAM}..={MAX_NGRAM}"
        )));
    }
    validate_dna(sequence)?;
    Ok(ngram_offsets(sequence, n)
        .map(|grams| grams.map(str::to_string).collect())
        .collect())
}

/// Borrowing form of [`genome_ngram_sentences`] for already-validated input.
pub(crate) fn ngram_offsets(sequence: &str, n: usize) -> impl Iterator<Item = impl Iterator<Item = &str>> {
    (0..n)
        .filter(move |&o| sequence.len() >= o + n)
        .map(move |o| {
            let usable = (sequence.len() - o) / n * n;
            sequence.as_bytes()[o..o + usable]
                .chunks_exact(n)
                .map(|c| std::str::from_utf8(c).expect("ASCII"))
        })
}

fn accept(seq: String, policy: InvalidBasePolicy, record: usize, set: &mut CodingRegionSet) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::parse("coding regions", record, "empty sequence"));
    }
    match validate_dna(&seq) {
        Ok(()) => set.sequences.push(seq),
        Err(err) => match policy {
            InvalidBasePolicy::Reject => {
                return Err(Error::parse("coding regions", record, err.to_string()))
            }
            InvalidBasePolicy::Clean => {
                let upper = seq.to_ascii_uppercase();
                if validate_dna(&upper).is_ok() {
                    set.sequences.push(upper);
                } else {
                    set.dropped += 1;
                }
            }
        },
    }
    Ok(())
}

pub fn parse_fasta(text: &str, organism: &str, policy: InvalidBasePolicy) -> Result<CodingRegionSet> {
    let mut set = CodingRegionSet {
        organism: organism.to_string(),
        sequences: Vec::new(),
        dropped: 0,
    };
    let mut current: Option<String> = None;
    let mut record = 0usize;
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.starts_with('>') {
            if let Some(seq) = current.take() {
                accept(seq, policy, record, &mut set)?;
                record += 1;
            }
            current = Some(String::new());
        } else if line.trim().is_empty() || line.starts_with(';') {
            continue;
        } else {
            match current.as_mut() {
                Some(seq) => seq.push_str(line.trim()),
                None => {
                    return Err(Error::parse(
                        "coding regions",
                        record,
                        "sequence data before the first '>' header",
                    ))
                }
            }
        }
    }
    if let Some(seq) = current {
        accept(seq, policy, record, &mut set)?;
    }
    Ok(set)
}

/// `organism<TAB>sequence` rows. All rows must name the same organism.
pub fn parse_genome_tsv(text: &str, policy: InvalidBasePolicy) -> Result<CodingRegionSet> {
    let mut set: Option<CodingRegionSet> = None;
    for (record, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let (organism, seq) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse("coding regions", record, "expected organism<TAB>sequence"))?;
        let set = set.get_or_insert_with(|| CodingRegionSet {
            organism: organism.to_string(),
            sequences: Vec::new(),
            dropped: 0,
        });
        if set.organism != organism {
            return Err(Error::parse(
                "coding regions",
                record,
                format!("organism {organism:?} differs from {:?}", set.organism),
            ));
        }
        accept(seq.trim().to_string(), policy, record, set)?;
    }
    set.ok_or_else(|| Error::Empty("coding-region file has no records".into()))
}

/// Load a coding-region file. For FASTA the organism is the file stem.
pub fn load_coding_regions(
    path: &Path,
    format: GenomeFormat,
    policy: InvalidBasePolicy,
) -> Result<CodingRegionSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let set = match format {
        GenomeFormat::Fasta => {
            let organism = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            parse_fasta(&text, &organism, policy)?
        }
        GenomeFormat::Tsv => parse_genome_tsv(&text, policy)?,
    };
    log::info!(
        "loaded {} coding regions for {} ({} dropped)",
        set.len(),
        set.organism,
        set.dropped
    );
    Ok(set)
}
