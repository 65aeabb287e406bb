use std::collections::{BTreeSet, HashMap};
use std::fs;

use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::natural::{count, write_tree};
use super::{cache_key, cached, in_stage, sha256_hex, write_file, ArtifactKind, Clock, RunConfig, RunManifest};
use crate::alignment::AlignmentTable;
use crate::corpus::{load_coding_regions, ngram_offsets, CodingRegionSet, Vocabulary};
use crate::divergence::{distance_matrix, DistanceMatrix, PivotScope};
use crate::embedding::{EmbeddingConfig, EmbeddingModel, Trainer};
use crate::error::{Error, Result};

/// Count every non-overlapping `n`-gram at every offset.
fn ngram_counts(set: &CodingRegionSet, n: usize) -> HashMap<&str, u64> {
    let mut counts = HashMap::new();
    for seq in &set.sequences {
        for grams in ngram_offsets(seq, n) {
            for g in grams {
                *counts.entry(g).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// One sentence per (sequence, offset), restricted to `vocab`.
fn encode(set: &CodingRegionSet, n: usize, vocab: &Vocabulary) -> Vec<Vec<u32>> {
    set.sequences
        .iter()
        .flat_map(|seq| ngram_offsets(seq, n).map(|grams| grams.filter_map(|g| vocab.id(g)).collect::<Vec<u32>>()))
        .filter(|s| !s.is_empty())
        .collect()
}

fn train_encoded(vocab: Vocabulary, sentences: &[Vec<u32>], config: &EmbeddingConfig) -> Result<EmbeddingModel<f32>> {
    Trainer::new(vocab, config.clone())?
        .run(sentences, |_, _| {})
        .map(|(model, _)| model)
}

/// Genome workflow: one embedding per (organism, n) over the n-grams seen
/// in every organism, identity alignment, one distance matrix per n.
///
/// Per n it writes `vocab/<organism>_n<n>.tsv`, `models/<organism>_n<n>.bin`,
/// `alignment_n<n>.tsv`, `matrix_n<n>.json`, `heatmap_n<n>.json`,
/// `tree_n<n>.nwk` and `tree_n<n>.svg`.
pub fn run_genome(config: &RunConfig) -> Result<RunManifest> {
    config.validate()?;
    let gen = config
        .genome
        .as_ref()
        .ok_or_else(|| Error::Config("genome workflow needs a [genome] section".into()))?;
    let out = config.out.as_path();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let pool = config.pool()?;
    let mut manifest = RunManifest::new(config.workflow, config.hash());
    let mut clock = Clock::new();
    let names: Vec<String> = gen.organisms.iter().map(|o| o.name.clone()).collect();

    // ingest
    let sets: Vec<(CodingRegionSet, String)> = clock.time("ingest", || {
        pool.install(|| {
            gen.organisms
                .par_iter()
                .map(|org| {
                    let digest = sha256_hex(org.path.to_string_lossy().as_bytes());
                    in_stage(&format!("ingest:{}", org.name), &digest, (|| {
                        let mut set = load_coding_regions(&org.path, org.format, gen.policy)?;
                        if set.is_empty() {
                            return Err(Error::Empty(format!("organism {:?} has no coding regions", org.name)));
                        }
                        set.organism = org.name.clone();
                        let mut h = Sha256::new();
                        for s in &set.sequences {
                            h.update(s.as_bytes());
                            h.update(b"\n");
                        }
                        let digest = hex::encode(h.finalize());
                        Ok((set, digest))
                    })())
                })
                .collect::<Result<_>>()
        })
    })?;
    for (set, _) in &sets {
        let grams: serde_json::Map<String, serde_json::Value> = gen
            .ngrams
            .iter()
            .map(|&n| (n.to_string(), json!(set.ngram_token_count(n))))
            .collect();
        manifest.statistics.insert(
            set.organism.clone(),
            json!({
                "coding_regions": set.len(),
                "dropped": set.dropped,
                "ngram_tokens": grams,
            }),
        );
    }

    let embedding = config.embedding_for(&gen.embedding);
    let mut ngrams = gen.ngrams.clone();
    ngrams.sort_unstable();
    ngrams.dedup();
    for n in ngrams {
        let stage = format!("n={n}");
        // vocabulary
        let (vocabs, shared) = clock.time(format!("vocabulary:{stage}"), || {
            let per_org: Vec<Vocabulary> = pool.install(|| {
                sets.par_iter()
                    .map(|(set, _)| Vocabulary::from_counts(ngram_counts(set, n), embedding.min_count))
                    .collect::<Result<_>>()
            })?;
            let mut shared: BTreeSet<String> = per_org[0].words().iter().cloned().collect();
            for v in &per_org[1..] {
                shared.retain(|w| v.contains(w));
            }
            if shared.len() < 2 {
                return in_stage(
                    &format!("vocabulary:{stage}"),
                    "",
                    Err(Error::Empty(format!(
                        "only {} {n}-grams are shared by all organisms",
                        shared.len()
                    ))),
                );
            }
            let vocabs: Vec<Vocabulary> = per_org.iter().map(|v| v.retain(|w| shared.contains(w))).collect();
            Ok((vocabs, shared.into_iter().collect::<Vec<String>>()))
        })?;
        let shared_digest = sha256_hex(shared.join("\n").as_bytes());
        manifest
            .statistics
            .insert(format!("shared_vocabulary_n{n}"), json!(shared.len()));

        // train
        let trained: Vec<(EmbeddingModel<f32>, bool)> = clock.time(format!("train:{stage}"), || {
            pool.install(|| {
                sets.par_iter()
                    .zip(&vocabs)
                    .map(|((set, digest), vocab)| {
                        let key = cache_key("train-genome", &[digest, &n.to_string(), &shared_digest], &embedding);
                        let path = out.join("models").join(format!("{}_n{n}.bin", set.organism));
                        in_stage(
                            &format!("train:{}:{stage}", set.organism),
                            digest,
                            cached(
                                &path,
                                &key,
                                EmbeddingModel::load,
                                || train_encoded(vocab.clone(), &encode(set, n, vocab), &embedding),
                                |m, p| m.save(p),
                            ),
                        )
                    })
                    .collect::<Result<_>>()
            })
        })?;
        for ((set, _), (model, hit)) in sets.iter().zip(&trained) {
            count(&mut manifest, *hit);
            let vocab_path = out.join("vocab").join(format!("{}_n{n}.tsv", set.organism));
            write_file(&vocab_path, model.vocab().to_tsv())?;
            manifest.record(out, ArtifactKind::Vocabulary, &vocab_path)?;
            manifest.record(
                out,
                ArtifactKind::Model,
                &out.join("models").join(format!("{}_n{n}.bin", set.organism)),
            )?;
        }

        // align: identity over the shared vocabulary
        let table = AlignmentTable::identity(&shared, &names);
        let table_path = out.join(format!("alignment_n{n}.tsv"));
        table.save(&table_path)?;
        manifest.record(out, ArtifactKind::Table, &table_path)?;

        // diverge
        let models: Vec<(&str, &EmbeddingModel<f32>)> =
            names.iter().map(|s| s.as_str()).zip(trained.iter().map(|(m, _)| m)).collect();
        let matrix: DistanceMatrix<f64> = clock.time(format!("diverge:{stage}"), || {
            pool.install(|| in_stage(&format!("diverge:{stage}"), &shared_digest, distance_matrix(&models, &table, PivotScope::Global)))
        })?;
        let matrix_path = out.join(format!("matrix_n{n}.json"));
        let heatmap_path = out.join(format!("heatmap_n{n}.json"));
        matrix.save_json(&matrix_path)?;
        write_file(&heatmap_path, matrix.to_heatmap_json(n))?;
        manifest.record(out, ArtifactKind::Matrix, &matrix_path)?;
        manifest.record(out, ArtifactKind::Heatmap, &heatmap_path)?;

        // cluster
        clock.time(format!("cluster:{stage}"), || {
            write_tree(out, &format!("tree_n{n}"), &matrix, gen.annotations.as_deref(), &mut manifest)
        })?;
    }

    manifest.timings = clock.timings;
    manifest.save(out)?;
    Ok(manifest)
}
