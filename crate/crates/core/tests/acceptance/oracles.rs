//! Criteria 1, 2, 3, 6, 7: implementation versus independent oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weld::clustering::{upgma, Dendrogram};
use weld::corpus::{genome_ngram_sentences, ngram_token_count, Vocabulary};
use weld::divergence::{jsd, DistanceMatrix};
use weld::embedding::{pair_gradient, subsample_discard_prob, PairLabel, Subsampler};

use crate::Outcome;

// ---------------------------------------------------------------- criterion 1

/// Pair loss coded directly from the definition.
fn reference_loss(v: &[f64], u: &[f64], positive: bool) -> f64 {
    let s: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
    let sign = if positive { 1.0 } else { -1.0 };
    (1.0 + (-sign * s).exp()).ln()
}

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[i] += step;
            lo[i] -= step;
            (f(&hi) - f(&lo)) / (2.0 * step)
        })
        .collect()
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale < 1e-8 {
        diff
    } else {
        diff / scale
    }
}

pub fn criterion_1() -> Outcome {
    const DIM: usize = 10;
    const STEP: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for draw in 0..1000 {
        let v: Vec<f64> = (0..DIM).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..DIM).map(|_| rng.random_range(-1.0..1.0)).collect();
        let positive = draw % 2 == 0;
        let label = if positive { PairLabel::Positive } else { PairLabel::Negative };
        let g = pair_gradient(&v, &u, label);
        let num_center = central_difference(|x| reference_loss(x, &u, positive), &v, STEP);
        let num_context = central_difference(|x| reference_loss(&v, x, positive), &u, STEP);
        worst = worst
            .max(relative_error(&g.center, &num_center))
            .max(relative_error(&g.context, &num_context));
    }
    Outcome::new(worst < 1e-4, format!("max relative error {worst:.2e} over 1000 draws (limit 1e-4)"))
}

// ---------------------------------------------------------------- criterion 2

/// `JSD = ½ KL(p‖m) + ½ KL(q‖m)` in bits.
fn reference_jsd(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = (a + b) / 2.0;
        if a > 0.0 {
            total += 0.5 * a * (a / m).log2();
        }
        if b > 0.0 {
            total += 0.5 * b * (b / m).log2();
        }
    }
    total
}

fn random_distribution(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let sparse = rng.random_bool(0.3);
    let raw: Vec<f64> = (0..len)
        .map(|_| if sparse && rng.random_bool(0.4) { 0.0 } else { rng.random::<f64>() })
        .collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        let mut one = vec![0.0; len];
        one[0] = 1.0;
        return one;
    }
    raw.into_iter().map(|x| x / total).collect()
}

pub fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let len = rng.random_range(2..=100);
        let p = random_distribution(&mut rng, len);
        let q = random_distribution(&mut rng, len);
        let got = jsd(&p, &q).unwrap();
        worst = worst.max((got - reference_jsd(&p, &q)).abs());
    }
    let worked = jsd(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
    // H(0.75, 0.25) - 1/2, from the entropy definition.
    let expected = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2()) - 0.5;
    let worked_err = (worked - expected).abs().max((worked - 0.311_278_124_459_132_8).abs());
    Outcome::new(
        worst <= 1e-12 && worked_err <= 1e-9,
        format!("max |Δ| {worst:.2e} over 1000 pairs (limit 1e-12); JSD((.5,.5),(1,0)) = {worked:.12}"),
    )
}

// ---------------------------------------------------------------- criterion 3

/// Naive UPGMA: cluster distance recomputed as the mean over all cross
/// pairs of the original matrix at every step. Returns merged leaf sets
/// (left, right) and merge distances.
pub fn reference_upgma(d: &[Vec<f64>]) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let mut clusters: Vec<Vec<usize>> = (0..d.len()).map(|i| vec![i]).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        // Clusters are kept sorted by smallest leaf, so index order is rank order.
        clusters.sort_by_key(|c| c[0]);
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let mut sum = 0.0;
                for &a in &clusters[i] {
                    for &b in &clusters[j] {
                        sum += d[a][b];
                    }
                }
                let mean = sum / (clusters[i].len() * clusters[j].len()) as f64;
                if best.is_none_or(|(_, _, m)| mean < m) {
                    best = Some((i, j, mean));
                }
            }
        }
        let (i, j, dist) = best.unwrap();
        let right = clusters.remove(j);
        let left = clusters[i].clone();
        clusters[i].extend(&right);
        clusters[i].sort_unstable();
        merges.push((left, right, dist));
    }
    merges
}

fn leaf_sets(tree: &Dendrogram<f64>) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    tree.merges()
        .iter()
        .map(|m| {
            let mut l = tree.leaves_under(m.left);
            let mut r = tree.leaves_under(m.right);
            l.sort_unstable();
            r.sort_unstable();
            (l, r, 2.0 * m.height)
        })
        .collect()
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("L{i}")).collect()
}

fn random_matrix(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = rng.random_range(0.0..1.0);
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    d
}

/// Cophenetic matrix of a random binary tree with increasing heights.
fn random_ultrametric(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut height = 0.0;
    while clusters.len() > 1 {
        height += rng.random_range(0.01..1.0);
        let i = rng.random_range(0..clusters.len());
        let a = clusters.swap_remove(i);
        let j = rng.random_range(0..clusters.len());
        for &x in &a {
            for &y in &clusters[j] {
                d[x][y] = height;
                d[y][x] = height;
            }
        }
        clusters[j].extend(a);
    }
    d
}

pub fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.random_range(2..=8);
        let d = random_matrix(&mut rng, n);
        let m = DistanceMatrix::from_rows(labels(n), d.clone()).unwrap();
        let got = leaf_sets(&upgma(&m).unwrap());
        let want = reference_upgma(&d);
        let same = got.len() == want.len()
            && got
                .iter()
                .zip(&want)
                .all(|(g, w)| g.0 == w.0 && g.1 == w.1 && (g.2 - w.2).abs() <= 1e-12);
        if !same {
            mismatches += 1;
        }
    }
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(2..=8);
        let d = random_ultrametric(&mut rng, n);
        let m = DistanceMatrix::from_rows(labels(n), d.clone()).unwrap();
        let coph = upgma(&m).unwrap().cophenetic();
        for (i, row) in d.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                worst = worst.max((coph.get(i, j) - x).abs());
            }
        }
    }
    Outcome::new(
        mismatches == 0 && worst <= 1e-12,
        format!("{mismatches}/500 merge-sequence mismatches; max cophenetic error {worst:.2e} on 500 ultrametric inputs"),
    )
}

// ---------------------------------------------------------------- criterion 6

/// Walk every offset and cut consecutive windows, returning the grams.
fn enumerate_grams(seq: &str, n: usize) -> Vec<String> {
    let bytes = seq.as_bytes();
    let mut grams = Vec::new();
    for offset in 0..n {
        let mut pos = offset;
        while pos + n <= bytes.len() {
            grams.push(String::from_utf8(bytes[pos..pos + n].to_vec()).unwrap());
            pos += n;
        }
    }
    grams
}

pub fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let bases = *b"ACGT";
    let mut failures = 0;
    for i in 0..10_000 {
        let n = 3 + i % 4;
        let len: usize = rng.random_range(0..200);
        let seq: String = (0..len).map(|_| bases[rng.random_range(0..4)] as char).collect();
        let produced: Vec<String> = genome_ngram_sentences(&seq, n).unwrap().into_iter().flatten().collect();
        let closed: u64 = (0..n).map(|o| (len.saturating_sub(o) / n) as u64).sum();
        let count = produced.len() as u64;
        if count != closed || produced != enumerate_grams(&seq, n) || count != ngram_token_count(len, n) {
            failures += 1;
        }
    }
    Outcome::new(failures == 0, format!("{failures}/10000 sequences disagree with closed form or enumerator"))
}

// ---------------------------------------------------------------- criterion 7

pub fn criterion_7() -> Outcome {
    const TRIALS: u32 = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let settings: Vec<(u64, u64, f64)> = [
        (1, 1000, 1e-3),
        (5, 1000, 1e-3),
        (10, 1000, 1e-3),
        (50, 1000, 1e-3),
        (100, 1000, 1e-3),
        (250, 1000, 1e-3),
        (500, 1000, 1e-3),
        (900, 1000, 1e-3),
        (1, 1000, 1e-2),
        (20, 1000, 1e-2),
        (100, 1000, 1e-2),
        (400, 1000, 1e-2),
        (800, 1000, 1e-2),
        (3, 10_000, 1e-4),
        (30, 10_000, 1e-4),
        (300, 10_000, 1e-4),
        (3000, 10_000, 1e-4),
        (9000, 10_000, 1e-5),
        (10, 100, 0.1),
        (60, 100, 0.5),
    ]
    .into_iter()
    .collect();
    let mut worst_z = 0.0f64;
    let mut failures = 0;
    for (count, total, t) in settings {
        let vocab = Vocabulary::from_counts([("w", count), ("rest", total - count)], 1).unwrap();
        let id = vocab.id("w").unwrap();
        let f = count as f64 / total as f64;
        let expected = subsample_discard_prob(f, t);
        let closed = (1.0 - (t / f).sqrt()).max(0.0);
        let sampler = Subsampler::new(&vocab, t);
        let discarded = (0..TRIALS).filter(|_| !sampler.keep(id, &mut rng)).count() as f64;
        let rate = discarded / TRIALS as f64;
        let se = (expected * (1.0 - expected) / TRIALS as f64).sqrt();
        let ok = (expected - closed).abs() < 1e-15
            && if se == 0.0 { rate == expected } else { ((rate - expected) / se).abs() <= 3.0 };
        if se > 0.0 {
            worst_z = worst_z.max(((rate - expected) / se).abs());
        }
        if !ok {
            failures += 1;
        }
    }
    Outcome::new(failures == 0, format!("{failures}/20 settings outside 3 SE; max |z| = {worst_z:.2}"))
}
