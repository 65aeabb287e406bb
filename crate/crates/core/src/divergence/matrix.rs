use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::AlignmentTable;
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::distribution::{shared_pivot_table, similarity_distribution, SimilarityDistribution};
use super::jsd::jsd;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Symmetric nonnegative matrix with zero diagonal and labelled rows.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<F> {
    labels: Vec<String>,
    values: Vec<F>,
}

impl<F: Real> DistanceMatrix<F> {
    /// Validate and wrap a row-major `n × n` matrix.
    pub fn new(labels: Vec<String>, values: Vec<F>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "{} values for {n} labels",
                values.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidMatrix(format!("duplicate label {dup:?}")));
        }
        for i in 0..n {
            if values[i * n + i] != F::zero() {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal at {:?}", labels[i])));
            }
            for j in 0..n {
                let a = values[i * n + j];
                if !a.is_finite() || a < F::zero() {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) = {a} is negative or not finite",
                        labels[i], labels[j]
                    )));
                }
                let b = values[j * n + i];
                if (a - b).abs().as_f64() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric entries ({}, {}): {a} vs {b}",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<F>>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != labels.len()) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        Self::new(labels, rows.concat())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.values[i * self.len() + j]
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn rows(&self) -> Vec<Vec<F>> {
        self.values.chunks(self.len().max(1)).map(<[F]>::to_vec).collect()
    }

    /// Reorder rows and columns to follow `order` (indices into the labels).
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.len();
        let mut values = Vec::with_capacity(n * n);
        for &i in order {
            for &j in order {
                values.push(self.get(i, j));
            }
        }
        DistanceMatrix {
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            values,
        }
    }

    pub fn to_json(&self) -> String {
        let doc = MatrixJson {
            labels: self.labels.clone(),
            values: MatrixValues::Rows(self.rows().into_iter().map(|r| r.into_iter().map(Real::as_f64).collect()).collect()),
        };
        serde_json::to_string_pretty(&doc).expect("matrix serializes")
    }

    /// Accepts `values` as nested rows or as a flat row-major array.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MatrixJson =
            serde_json::from_str(text).map_err(|e| Error::parse("distance matrix json", 0, e.to_string()))?;
        let flat = match doc.values {
            MatrixValues::Rows(rows) => {
                if rows.iter().any(|r| r.len() != doc.labels.len()) {
                    return Err(Error::InvalidMatrix("ragged rows".into()));
                }
                rows.concat()
            }
            MatrixValues::Flat(v) => v,
        };
        Self::new(doc.labels, flat.into_iter().map(F::lit).collect())
    }

    /// Header row of labels, then one labelled row per language.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for l in &self.labels {
            write!(out, "\t{l}").unwrap();
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.len() {
                write!(out, "\t{:?}", self.get(i, j).as_f64()).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("distance matrix tsv", 0, "missing header"))?;
        let labels: Vec<String> = header.split('\t').skip(1).map(str::to_string).collect();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut cols = line.split('\t');
            let label = cols.next().unwrap_or_default();
            if labels.get(i).map(String::as_str) != Some(label) {
                return Err(Error::parse("distance matrix tsv", i + 1, format!("row label {label:?} out of order")));
            }
            for c in cols {
                let v: f64 = c
                    .parse()
                    .map_err(|e| Error::parse("distance matrix tsv", i + 1, format!("{e}")))?;
                values.push(F::lit(v));
            }
        }
        Self::new(labels, values)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    /// `{"labels": [...], "n": n, "values": [[...]]}` for heatmap plotting,
    /// where `n` is the n-gram length the matrix was computed for.
    pub fn to_heatmap_json(&self, n: usize) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "labels": self.labels,
            "n": n,
            "values": self.rows().into_iter().map(|r| r.into_iter().map(Real::as_f64).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }))
        .expect("heatmap serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    labels: Vec<String>,
    values: MatrixValues,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixValues {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

/// Which pivot words a pair of languages is compared over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PivotScope {
    /// One pivot set resolvable in every language; all entries comparable.
    #[default]
    Global,
    /// Each pair uses the pivots resolvable in both of its languages.
    PerPair,
}

/// `JSD(ê_A, ê_B)` over the pivots resolvable in both languages.
pub fn weld_distance<T: Real, F: Real>(
    model_a: &EmbeddingModel<T>,
    model_b: &EmbeddingModel<T>,
    table: &AlignmentTable,
    lang_a: &str,
    lang_b: &str,
) -> Result<F> {
    let shared = shared_pivot_table(table, &[(lang_a, model_a), (lang_b, model_b)])?;
    let p = similarity_distribution::<T, F>(model_a, &shared, lang_a)?;
    let q = similarity_distribution::<T, F>(model_b, &shared, lang_b)?;
    jsd(p.probs(), q.probs())
}

/// Pairwise WELD distances. Each language's distribution is built once.
pub fn distance_matrix<T: Real, F: Real>(
    models: &[(&str, &EmbeddingModel<T>)],
    table: &AlignmentTable,
    scope: PivotScope,
) -> Result<DistanceMatrix<F>> {
    let n = models.len();
    if n < 2 {
        return Err(Error::InvalidMatrix(format!("need at least 2 languages, got {n}")));
    }
    let labels: Vec<String> = models.iter().map(|(l, _)| l.to_string()).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<F> = match scope {
        PivotScope::Global => {
            let shared = shared_pivot_table(table, models)?;
            log::info!("comparing {n} languages over {} shared pivot words", shared.len());
            let dists: Vec<SimilarityDistribution<F>> = models
                .par_iter()
                .map(|(lang, model)| similarity_distribution(model, &shared, lang))
                .collect::<Result<_>>()?;
            pairs
                .par_iter()
                .map(|&(i, j)| jsd(dists[i].probs(), dists[j].probs()))
                .collect::<Result<_>>()?
        }
        PivotScope::PerPair => {
            log::warn!("per-pair pivot sets: matrix entries are not on a common coordinate system");
            pairs
                .par_iter()
                .map(|&(i, j)| weld_distance(models[i].1, models[j].1, table, models[i].0, models[j].0))
                .collect::<Result<_>>()?
        }
    };
    let mut full = vec![F::zero(); n * n];
    for (&(i, j), &d) in pairs.iter().zip(&values) {
        full[i * n + j] = d;
        full[j * n + i] = d;
    }
    DistanceMatrix::new(labels, full)
}
