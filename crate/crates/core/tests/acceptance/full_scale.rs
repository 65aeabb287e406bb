//! Criterion 9: full-scale harness on format fixtures, plus exact
//! coding-region ingestion counts when the data is supplied.

use std::path::{Path, PathBuf};

use weld::corpus::{load_coding_regions, GenomeFormat, InvalidBasePolicy};
use weld::pipeline::{run_genome, run_natural, ArtifactKind, RunConfig, RunManifest};

use crate::Outcome;

/// Directory holding `<organism>.fasta` or `<organism>.tsv` coding-region files.
const CODING_REGIONS_ENV: &str = "WELD_CODING_REGIONS_DIR";

/// (organism, coding regions, 3-gram tokens).
const REFERENCE_COUNTS: [(&str, usize, u64); 12] = [
    ("arabidopsis", 179_824, 42_618_288),
    ("populus", 131_844, 28_478_304),
    ("moss", 167_999, 38_471_771),
    ("rice", 129_726, 34_507_116),
    ("sea-urchin", 143_457, 27_974_115),
    ("chicken", 187_761, 34_735_785),
    ("cow", 196_466, 43_222_520),
    ("dog", 381_147, 70_512_195),
    ("mouse", 215_274, 34_874_388),
    ("rat", 190_989, 41_635_602),
    ("human1", 319_391, 86_874_352),
    ("human2", 303_872, 77_791_232),
];

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run_fixture(name: &str, out: &Path) -> Result<RunManifest, String> {
    let path = fixtures().join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let mut config = RunConfig::from_toml(&text, &fixtures()).map_err(|e| e.to_string())?;
    config.out = out.to_path_buf();
    let manifest = match config.workflow {
        weld::pipeline::Workflow::Natural => run_natural(&config),
        weld::pipeline::Workflow::Genome => run_genome(&config),
    }
    .map_err(|e| e.to_string())?;
    manifest.verify(out).map_err(|e| e.to_string())?;
    Ok(manifest)
}

fn harness() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let nat = run_fixture("natural.toml", &tmp.path().join("natural"))?;
    let gen = run_fixture("genome.toml", &tmp.path().join("genome"))?;
    let models = nat.artifacts_of(ArtifactKind::Model).count();
    let matrices = gen.artifacts_of(ArtifactKind::Heatmap).count();
    if models != 3 || matrices != 2 {
        return Err(format!("unexpected artifact counts: {models} natural models, {matrices} genome heatmaps"));
    }
    Ok(format!("fixtures: natural {} artifacts, genome {} artifacts, manifests verified", nat.artifacts.len(), gen.artifacts.len()))
}

fn find_organism(dir: &Path, name: &str) -> Option<(PathBuf, GenomeFormat)> {
    [("fasta", GenomeFormat::Fasta), ("fa", GenomeFormat::Fasta), ("tsv", GenomeFormat::Tsv)]
        .into_iter()
        .map(|(ext, f)| (dir.join(format!("{name}.{ext}")), f))
        .find(|(p, _)| p.is_file())
}

/// `Ok(None)` when no data directory is configured.
fn reference_counts() -> Result<Option<String>, String> {
    let Some(dir) = std::env::var_os(CODING_REGIONS_ENV).map(PathBuf::from) else {
        return Ok(None);
    };
    let mut checked = Vec::new();
    for (name, crs, grams) in REFERENCE_COUNTS {
        let Some((path, format)) = find_organism(&dir, name) else {
            if name == "arabidopsis" {
                return Err(format!("{CODING_REGIONS_ENV} set but {name}.fasta/.tsv not found in {}", dir.display()));
            }
            continue;
        };
        let set = load_coding_regions(&path, format, InvalidBasePolicy::Clean).map_err(|e| e.to_string())?;
        let got = (set.len(), set.ngram_token_count(3));
        if got != (crs, grams) {
            return Err(format!("{name}: {} CRs / {} 3-grams, expected {crs} / {grams}", got.0, got.1));
        }
        checked.push(name);
    }
    Ok(Some(format!("coding-region counts exact for {}", checked.join(", "))))
}

pub fn criterion_9() -> Outcome {
    let harness = harness();
    let counts = reference_counts();
    match (harness, counts) {
        (Ok(h), Ok(Some(t))) => Outcome::new(true, format!("{h}; {t}")),
        (Ok(h), Ok(None)) => Outcome::new(
            true,
            format!("{h}; exact coding-region count check NOT RUN ({CODING_REGIONS_ENV} unset; full-scale figures need the full corpora)"),
        ),
        (Err(e), _) | (_, Err(e)) => Outcome::new(false, e),
    }
}
