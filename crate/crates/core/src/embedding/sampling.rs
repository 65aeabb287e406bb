use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::corpus::Vocabulary;

/// Probability of discarding a token of relative frequency `freq` under
/// subsampling threshold `t`: `max(0, 1 - sqrt(t / freq))`.
pub fn subsample_discard_prob(freq: f64, t: f64) -> f64 {
    (1.0 - (t / freq).sqrt()).max(0.0)
}

/// Noise distribution `P_n(w) ∝ count(w)^0.75`.
pub fn negative_sampling_distribution(vocab: &Vocabulary) -> Vec<f64> {
    let weights: Vec<f64> = vocab.counts().iter().map(|&c| (c as f64).powf(0.75)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// O(1) sampler over the noise distribution.
#[derive(Clone)]
pub struct NoiseSampler {
    alias: WeightedAliasIndex<f64>,
}

impl NoiseSampler {
    pub fn new(vocab: &Vocabulary) -> Self {
        let probs = negative_sampling_distribution(vocab);
        NoiseSampler {
            alias: WeightedAliasIndex::new(probs).expect("nonempty positive weights"),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.alias.sample(rng) as u32
    }
}

/// Per-token subsampling decision used by the trainer.
#[derive(Clone, Debug)]
pub struct Subsampler {
    discard: Vec<f64>,
}

impl Subsampler {
    /// Discard probabilities from relative frequencies `count / total`.
    pub fn new(vocab: &Vocabulary, t: f64) -> Self {
        let total = vocab.total_count() as f64;
        Subsampler {
            discard: vocab
                .counts()
                .iter()
                .map(|&c| subsample_discard_prob(c as f64 / total, t))
                .collect(),
        }
    }

    pub fn discard_prob(&self, id: u32) -> f64 {
        self.discard[id as usize]
    }

    /// Whether an occurrence of `id` survives subsampling. Consumes a random
    /// draw only for words with a nonzero discard probability.
    #[inline]
    pub fn keep<R: Rng + ?Sized>(&self, id: u32, rng: &mut R) -> bool {
        let p = self.discard[id as usize];
        p == 0.0 || rng.random::<f64>() >= p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vocab(counts: &[(&str, u64)]) -> Vocabulary {
        Vocabulary::from_counts(counts.iter().map(|&(w, c)| (w, c)), 1).unwrap()
    }

    #[test]
    fn discard_probability() {
        assert_eq!(subsample_discard_prob(1e-3, 1e-3), 0.0);
        assert!((subsample_discard_prob(0.1, 0.001) - 0.9).abs() < 1e-12);
        assert_eq!(subsample_discard_prob(1e-5, 1e-3), 0.0);
        assert!(subsample_discard_prob(1.0, 1e-3) < 1.0);
    }

    #[test]
    fn noise_distribution() {
        assert_eq!(negative_sampling_distribution(&vocab(&[("a", 1), ("b", 1)])), [0.5, 0.5]);
        let p = negative_sampling_distribution(&vocab(&[("a", 16), ("b", 1)]));
        assert!((p[0] - 8.0 / 9.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(negative_sampling_distribution(&vocab(&[("a", 3)])), [1.0]);
    }

    #[test]
    fn noise_sums_to_one() {
        let counts: Vec<(String, u64)> = (0..500).map(|i| (format!("w{i}"), 1 + (i * 7919) % 1000)).collect();
        let v = Vocabulary::from_counts(counts, 1).unwrap();
        let s: f64 = negative_sampling_distribution(&v).iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_frequencies_pass_chi_square() {
        let v = vocab(&[("a", 100), ("b", 30), ("c", 10), ("d", 3), ("e", 1)]);
        let p = negative_sampling_distribution(&v);
        let sampler = NoiseSampler::new(&v);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let mut hits = vec![0u64; p.len()];
        for _ in 0..n {
            hits[sampler.sample(&mut rng) as usize] += 1;
        }
        let chi2: f64 = hits
            .iter()
            .zip(&p)
            .map(|(&o, &pi)| {
                let e = pi * n as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        // 4 degrees of freedom; 18.47 is the 0.999 quantile.
        assert!(chi2 < 18.47, "chi2 = {chi2}");
    }
}
