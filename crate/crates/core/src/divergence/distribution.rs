use std::collections::HashMap;

use rayon::prelude::*;

use crate::alignment::AlignmentTable;
use crate::embedding::{cosine, EmbeddingModel};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Probability vector over unordered pivot pairs `(i, j)`, `i < j`, in
/// row-major upper-triangle order.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityDistribution<F> {
    pivots: usize,
    probs: Vec<F>,
}

/// Position of pair `(i, j)`, `i < j < k`, in row-major upper-triangle order.
pub fn pair_index(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k);
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

impl<F: Real> SimilarityDistribution<F> {
    /// Normalize nonnegative pair weights into a distribution.
    pub fn from_raw(pivots: usize, raw: Vec<F>) -> Result<Self> {
        if pivots < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 pivot words, found {pivots}"
            )));
        }
        if raw.len() != pivots * (pivots - 1) / 2 {
            return Err(Error::LengthMismatch {
                left: raw.len(),
                right: pivots * (pivots - 1) / 2,
            });
        }
        let total: F = raw.iter().copied().sum();
        if !total.is_finite() || total <= F::zero() {
            return Err(Error::InvalidDistribution(format!("total similarity mass {total}")));
        }
        Ok(SimilarityDistribution {
            pivots,
            probs: raw.into_iter().map(|x| x / total).collect(),
        })
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn prob(&self, i: usize, j: usize) -> F {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.probs[pair_index(a, b, self.pivots)]
    }

    /// `u64` length followed by little-endian values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + self.probs.len() * F::WIDTH as usize);
        out.extend_from_slice(&(self.pivots as u64).to_le_bytes());
        out.push(F::WIDTH);
        for &p in &self.probs {
            p.write_le(&mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 9 {
            return Err(Error::Format("truncated distribution".into()));
        }
        let pivots = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
        if bytes[8] != F::WIDTH {
            return Err(Error::Format(format!("scalar width {} != {}", bytes[8], F::WIDTH)));
        }
        let body = &bytes[9..];
        let pairs = pivots.saturating_mul(pivots.saturating_sub(1)) / 2;
        if pivots < 2 || body.len() != pairs * F::WIDTH as usize {
            return Err(Error::Format("distribution length does not match pivot count".into()));
        }
        Ok(SimilarityDistribution {
            pivots,
            probs: body.chunks_exact(F::WIDTH as usize).map(F::read_le).collect(),
        })
    }
}

/// Pivot positions whose target word for some language is missing from the
/// table or from that language's model, with the offending words.
pub fn unresolvable_pivots<T: Real>(
    table: &AlignmentTable,
    models: &[(&str, &EmbeddingModel<T>)],
) -> Result<Vec<(usize, String)>> {
    let mut bad: HashMap<usize, Vec<String>> = HashMap::new();
    for (lang, model) in models {
        for (i, target) in table.targets(lang)?.into_iter().enumerate() {
            match target {
                None => bad.entry(i).or_default().push(format!("{lang}:<unaligned>")),
                Some(w) if !model.vocab().contains(w) => {
                    bad.entry(i).or_default().push(format!("{lang}:{w}"))
                }
                Some(_) => {}
            }
        }
    }
    let mut out: Vec<(usize, String)> = bad.into_iter().map(|(i, w)| (i, w.join(","))).collect();
    out.sort();
    Ok(out)
}

/// Drop, for all languages at once, every pivot that cannot be resolved in
/// some language's model, so every distribution shares one coordinate system.
pub fn shared_pivot_table<T: Real>(
    table: &AlignmentTable,
    models: &[(&str, &EmbeddingModel<T>)],
) -> Result<AlignmentTable> {
    let languages: Vec<String> = models.iter().map(|(l, _)| l.to_string()).collect();
    let table = table.restrict(&languages)?;
    let bad = unresolvable_pivots(&table, models)?;
    if !bad.is_empty() {
        log::info!(
            "dropping {} of {} pivot words not resolvable in every model",
            bad.len(),
            table.len()
        );
    }
    let drop: std::collections::HashSet<usize> = bad.into_iter().map(|(i, _)| i).collect();
    Ok(table.retain_pivots(|i| !drop.contains(&i)))
}

/// Distribution of `(cos(w_i, w_j) + 1) / 2` over pivot pairs, L1-normalized.
///
/// Every pivot word's target for `language` must be in the model vocabulary.
pub fn similarity_distribution<T: Real, F: Real>(
    model: &EmbeddingModel<T>,
    table: &AlignmentTable,
    language: &str,
) -> Result<SimilarityDistribution<F>> {
    let targets = table.targets(language)?;
    let mut ids = Vec::with_capacity(targets.len());
    let mut missing = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        match t.and_then(|w| model.vocab().id(w)) {
            Some(id) => ids.push(id),
            None => missing.push(t.map_or_else(|| format!("<unaligned {}>", table.pivot_words()[i]), str::to_string)),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Alignment(format!(
            "{} target words for {language:?} missing from its model: {}",
            missing.len(),
            missing.join(", ")
        )));
    }
    let k = ids.len();
    if k < 2 {
        return Err(Error::InvalidDistribution(format!(
            "need at least 2 pivot words, found {k}"
        )));
    }
    let vectors: Vec<Vec<F>> = ids
        .iter()
        .map(|&id| model.vector_by_id(id).into_iter().map(|x| F::lit(x.as_f64())).collect())
        .collect();
    let half = F::lit(0.5);
    let rows: Vec<Vec<F>> = (0..k - 1)
        .into_par_iter()
        .map(|i| {
            (i + 1..k)
                .map(|j| {
                    let c = if ids[i] == ids[j] {
                        F::one()
                    } else {
                        cosine(&vectors[i], &vectors[j])?
                    };
                    Ok((c + F::one()) * half)
                })
                .collect::<Result<Vec<F>>>()
        })
        .collect::<Result<_>>()?;
    SimilarityDistribution::from_raw(k, rows.concat())
}
