use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use super::{cache_key, cached, in_stage, sha256_hex, write_file, ArtifactKind, Clock, RunConfig, RunManifest};
use crate::alignment::{align_to_pivot, AlignmentTable};
use crate::clustering::{render_dendrogram, to_newick, upgma, Annotations, RenderFormat};
use crate::corpus::load_verse_aligned;
use crate::divergence::{distance_matrix, DistanceMatrix};
use crate::embedding::{train, EmbeddingModel};
use crate::error::{Error, Result};

/// Natural-language workflow over a verse-aligned corpus.
///
/// Writes tokenized corpora, per-language vocabularies and models, the
/// pivot alignment table, the distance matrix (JSON and TSV), and the
/// clustering as Newick and SVG.
pub fn run_natural(config: &RunConfig) -> Result<RunManifest> {
    config.validate()?;
    let nat = config
        .natural
        .as_ref()
        .ok_or_else(|| Error::Config("natural workflow needs a [natural] section".into()))?;
    let out = config.out.as_path();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let pool = config.pool()?;
    let mut manifest = RunManifest::new(config.workflow, config.hash());
    let mut clock = Clock::new();

    // ingest
    let source_digest = sha256_hex(nat.corpus.to_string_lossy().as_bytes());
    let (corpus, languages, digests) = clock.time("ingest", || {
        in_stage("ingest", &source_digest, {
            (|| {
                let (corpus, dropped) = load_verse_aligned(&nat.corpus, nat.format, nat.punctuation)?;
                let languages = if nat.languages.is_empty() {
                    corpus.languages().to_vec()
                } else {
                    nat.languages.clone()
                };
                if languages.len() < 2 {
                    return Err(Error::Config(format!(
                        "at least 2 languages are needed, found {}",
                        languages.len()
                    )));
                }
                let mut keep = languages.clone();
                if !keep.contains(&nat.pivot) {
                    keep.push(nat.pivot.clone());
                }
                let corpus = corpus.select(&keep)?;
                let paths = corpus.write_tsv_dir(&out.join("corpus"))?;
                let mut digests = Vec::new();
                for (lang, path) in corpus.languages().iter().zip(&paths) {
                    manifest.record(out, ArtifactKind::Corpus, path)?;
                    digests.push((lang.clone(), manifest.artifacts.last().unwrap().sha256.clone()));
                    let tokens: usize = corpus.sentences(lang)?.iter().map(Vec::len).sum();
                    manifest.statistics.insert(
                        lang.clone(),
                        json!({
                            "verses": corpus.len(),
                            "tokens": tokens,
                            "dropped_verses": dropped.get(lang).copied().unwrap_or(0),
                        }),
                    );
                }
                Ok((corpus, languages, digests))
            })()
        })
    })?;
    let digest_of = |lang: &str| -> &str {
        digests
            .iter()
            .find(|(l, _)| l == lang)
            .map(|(_, d)| d.as_str())
            .expect("ingested language")
    };

    // train
    let embedding = config.embedding_for(&nat.embedding);
    let trained: Vec<(EmbeddingModel<f32>, bool)> = clock.time("train", || {
        pool.install(|| {
            languages
                .par_iter()
                .map(|lang| {
                    let digest = digest_of(lang);
                    let key = cache_key("train", &[digest], &embedding);
                    let path = out.join("models").join(format!("{lang}.bin"));
                    in_stage(
                        &format!("train:{lang}"),
                        digest,
                        cached(
                            &path,
                            &key,
                            EmbeddingModel::load,
                            || train(corpus.sentences(lang)?, &embedding),
                            |m, p| m.save(p),
                        ),
                    )
                })
                .collect::<Result<_>>()
        })
    })?;
    for (lang, (model, hit)) in languages.iter().zip(&trained) {
        count(&mut manifest, *hit);
        let vocab_path = out.join("vocab").join(format!("{lang}.tsv"));
        write_file(&vocab_path, model.vocab().to_tsv())?;
        manifest.record(out, ArtifactKind::Vocabulary, &vocab_path)?;
        manifest.record(out, ArtifactKind::Model, &out.join("models").join(format!("{lang}.bin")))?;
    }

    // align
    let mut align_inputs: Vec<&str> = vec![digest_of(&nat.pivot)];
    align_inputs.extend(languages.iter().map(|l| digest_of(l)));
    let align_key = cache_key("align", &align_inputs, &(&nat.pivot, &languages, &nat.alignment));
    let table_path = out.join("alignment.tsv");
    let (table, hit) = clock.time("align", || {
        pool.install(|| {
            in_stage(
                "align",
                &align_key,
                cached(
                    &table_path,
                    &align_key,
                    AlignmentTable::load,
                    || align_to_pivot(&corpus, &nat.pivot, &languages, &nat.alignment),
                    |t, p| t.save(p),
                ),
            )
        })
    })?;
    count(&mut manifest, hit);
    manifest.record(out, ArtifactKind::Table, &table_path)?;
    manifest.statistics.insert("pivot_words".into(), json!(table.len()));

    // diverge
    let models: Vec<(&str, &EmbeddingModel<f32>)> =
        languages.iter().map(|l| l.as_str()).zip(trained.iter().map(|(m, _)| m)).collect();
    let diverge_digest = cache_key("diverge", &[&align_key], &nat.scope);
    let matrix: DistanceMatrix<f64> = clock.time("diverge", || {
        pool.install(|| in_stage("diverge", &diverge_digest, distance_matrix(&models, &table, nat.scope)))
    })?;
    let matrix_json = out.join("matrix.json");
    let matrix_tsv = out.join("matrix.tsv");
    matrix.save_json(&matrix_json)?;
    matrix.save_tsv(&matrix_tsv)?;
    manifest.record(out, ArtifactKind::Matrix, &matrix_json)?;
    manifest.record(out, ArtifactKind::Matrix, &matrix_tsv)?;

    // cluster
    clock.time("cluster", || {
        write_tree(out, "tree", &matrix, nat.annotations.as_deref(), &mut manifest)
    })?;

    manifest.timings = clock.timings;
    manifest.save(out)?;
    Ok(manifest)
}

pub(super) fn count(manifest: &mut RunManifest, hit: bool) {
    if hit {
        manifest.cache.hits += 1;
    } else {
        manifest.cache.misses += 1;
    }
}

/// UPGMA over `matrix`, written as `<stem>.nwk` and `<stem>.svg`.
pub(super) fn write_tree(
    out: &Path,
    stem: &str,
    matrix: &DistanceMatrix<f64>,
    annotations: Option<&Path>,
    manifest: &mut RunManifest,
) -> Result<()> {
    let digest = sha256_hex(matrix.to_json().as_bytes());
    in_stage("cluster", &digest, (|| {
        let tree = upgma(matrix)?;
        let annotations = annotations.map(Annotations::load).transpose()?;
        let rendered = render_dendrogram(&tree, RenderFormat::Svg, annotations.as_ref());
        manifest.warnings.extend(rendered.warnings);
        let nwk = out.join(format!("{stem}.nwk"));
        let svg = out.join(format!("{stem}.svg"));
        write_file(&nwk, to_newick(&tree) + "\n")?;
        write_file(&svg, rendered.document)?;
        manifest.record(out, ArtifactKind::Tree, &nwk)?;
        manifest.record(out, ArtifactKind::Figure, &svg)
    })())
}
