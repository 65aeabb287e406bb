use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{build_vocabulary, Vocabulary};
use crate::error::{Error, Result};
use crate::scalar::{dot, log_sigmoid, sigmoid, Real};

use super::config::{EmbeddingConfig, WindowMode};
use super::model::EmbeddingModel;
use super::sampling::{NoiseSampler, Subsampler};

/// Floor of the linearly decaying learning rate, relative to `initial_lr`.
const MIN_LR_FRACTION: f64 = 1e-4;

/// Per-epoch statistics of a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean negative-sampling loss per scored pair, one entry per epoch.
    pub epoch_losses: Vec<f64>,
    /// Scored (positive + negative) pairs per epoch.
    pub epoch_pairs: Vec<u64>,
    /// Tokens per epoch before subsampling.
    pub tokens_per_epoch: u64,
}

/// Build a vocabulary with `config.min_count` and train on `sentences`.
pub fn train<T, S, W>(sentences: &[S], config: &EmbeddingConfig) -> Result<EmbeddingModel<T>>
where
    T: Real,
    S: AsRef<[W]>,
    W: AsRef<str>,
{
    config.validate()?;
    let vocab = build_vocabulary(sentences, config.min_count)?;
    train_with_vocab(vocab, sentences, config)
}

/// Train against a fixed vocabulary; tokens outside it are skipped.
pub fn train_with_vocab<T, S, W>(
    vocab: Vocabulary,
    sentences: &[S],
    config: &EmbeddingConfig,
) -> Result<EmbeddingModel<T>>
where
    T: Real,
    S: AsRef<[W]>,
    W: AsRef<str>,
{
    let encoded: Vec<Vec<u32>> = sentences.iter().map(|s| vocab.encode(s.as_ref())).collect();
    Trainer::new(vocab, config.clone())?
        .run(&encoded, |_, _| {})
        .map(|(model, _)| model)
}

/// Skip-gram negative-sampling trainer over id-encoded sentences.
pub struct Trainer<T> {
    model: EmbeddingModel<T>,
    noise: NoiseSampler,
    subsampler: Subsampler,
    rng: ChaCha8Rng,
}

impl<T: Real> Trainer<T> {
    /// Initialize input rows uniformly in `[-0.5/d, 0.5/d]` and context rows
    /// to zero.
    pub fn new(vocab: Vocabulary, config: EmbeddingConfig) -> Result<Self> {
        config.validate()?;
        if vocab.len() < 2 {
            return Err(Error::Config(format!(
                "training needs at least 2 vocabulary words, found {}",
                vocab.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let dim = config.dim;
        let scale = 0.5 / dim as f64;
        let input = (0..vocab.len() * dim)
            .map(|_| T::lit(rng.random_range(-scale..scale)))
            .collect();
        let context = vec![T::zero(); vocab.len() * dim];
        let noise = NoiseSampler::new(&vocab);
        let subsampler = Subsampler::new(&vocab, config.subsample);
        Ok(Trainer {
            model: EmbeddingModel {
                vocab,
                dim,
                input,
                context,
                config,
            },
            noise,
            subsampler,
            rng,
        })
    }

    /// Run all epochs. `observer` sees the model after every epoch.
    pub fn run<F>(mut self, sentences: &[Vec<u32>], mut observer: F) -> Result<(EmbeddingModel<T>, TrainReport)>
    where
        F: FnMut(usize, &EmbeddingModel<T>),
    {
        let config = self.model.config.clone();
        let tokens: u64 = sentences.iter().map(|s| s.len() as u64).sum();
        let schedule = Schedule {
            initial: config.initial_lr,
            total: tokens * config.epochs as u64 + 1,
        };
        let processed = AtomicU64::new(0);
        let mut report = TrainReport {
            tokens_per_epoch: tokens,
            ..TrainReport::default()
        };

        for epoch in 0..config.epochs {
            let params = SharedParams::new(&mut self.model);
            let stats = if config.threads == 1 {
                let mut worker = Worker::new(&params, &self.noise, &self.subsampler, &config, &mut self.rng);
                for sentence in sentences {
                    worker.sentence(sentence, schedule.rate(&processed));
                    processed.fetch_add(sentence.len() as u64, Ordering::Relaxed);
                }
                worker.stats
            } else {
                self.parallel_epoch(&params, sentences, &config, epoch, &schedule, &processed)
            };
            let mean = stats.loss / stats.pairs.max(1) as f64;
            let params_finite = self
                .model
                .input
                .iter()
                .chain(&self.model.context)
                .all(|x| x.is_finite());
            if !mean.is_finite() || !params_finite {
                return Err(Error::Diverged { epoch: epoch + 1 });
            }
            log::debug!("epoch {}: mean pair loss {mean:.5} over {} pairs", epoch + 1, stats.pairs);
            report.epoch_losses.push(mean);
            report.epoch_pairs.push(stats.pairs);
            observer(epoch + 1, &self.model);
        }
        Ok((self.model, report))
    }

    fn parallel_epoch(
        &mut self,
        params: &SharedParams<T>,
        sentences: &[Vec<u32>],
        config: &EmbeddingConfig,
        epoch: usize,
        schedule: &Schedule,
        processed: &AtomicU64,
    ) -> EpochStats {
        let chunk = sentences.len().div_ceil(config.threads).max(1);
        let seeds: Vec<u64> = (0..config.threads).map(|_| self.rng.random()).collect();
        let noise = &self.noise;
        let subsampler = &self.subsampler;
        std::thread::scope(|scope| {
            let handles: Vec<_> = sentences
                .chunks(chunk)
                .zip(seeds)
                .map(|(part, seed)| {
                    scope.spawn(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ epoch as u64);
                        let mut worker = Worker::new(params, noise, subsampler, config, &mut rng);
                        for sentence in part {
                            worker.sentence(sentence, schedule.rate(processed));
                            processed.fetch_add(sentence.len() as u64, Ordering::Relaxed);
                        }
                        worker.stats
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .fold(EpochStats::default(), |a, b| EpochStats {
                    loss: a.loss + b.loss,
                    pairs: a.pairs + b.pairs,
                })
        })
    }
}

struct Schedule {
    initial: f64,
    total: u64,
}

impl Schedule {
    fn rate(&self, processed: &AtomicU64) -> f64 {
        let done = processed.load(Ordering::Relaxed) as f64 / self.total as f64;
        self.initial * (1.0 - done).max(MIN_LR_FRACTION)
    }
}

#[derive(Default)]
struct EpochStats {
    loss: f64,
    pairs: u64,
}

/// Raw view of the two parameter matrices shared by training workers.
///
/// Workers read and write rows without synchronization (Hogwild). With a
/// single worker all access is exclusive.
struct SharedParams<T> {
    input: *mut T,
    context: *mut T,
    dim: usize,
    rows: usize,
}

unsafe impl<T: Send> Send for SharedParams<T> {}
unsafe impl<T: Sync> Sync for SharedParams<T> {}

impl<T: Real> SharedParams<T> {
    fn new(model: &mut EmbeddingModel<T>) -> Self {
        SharedParams {
            input: model.input.as_mut_ptr(),
            context: model.context.as_mut_ptr(),
            dim: model.dim,
            rows: model.vocab.len(),
        }
    }

    /// Safety: `id < rows`; the caller must not hold another slice of the
    /// same row.
    #[allow(clippy::mut_from_ref)]
    unsafe fn input_row(&self, id: u32) -> &mut [T] {
        debug_assert!((id as usize) < self.rows);
        std::slice::from_raw_parts_mut(self.input.add(id as usize * self.dim), self.dim)
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn context_row(&self, id: u32) -> &mut [T] {
        debug_assert!((id as usize) < self.rows);
        std::slice::from_raw_parts_mut(self.context.add(id as usize * self.dim), self.dim)
    }
}

struct Worker<'a, T, R> {
    params: &'a SharedParams<T>,
    noise: &'a NoiseSampler,
    subsampler: &'a Subsampler,
    config: &'a EmbeddingConfig,
    rng: R,
    kept: Vec<u32>,
    grad: Vec<T>,
    stats: EpochStats,
}

impl<'a, T: Real, R: Rng> Worker<'a, T, R> {
    fn new(
        params: &'a SharedParams<T>,
        noise: &'a NoiseSampler,
        subsampler: &'a Subsampler,
        config: &'a EmbeddingConfig,
        rng: R,
    ) -> Self {
        Worker {
            params,
            noise,
            subsampler,
            config,
            rng,
            kept: Vec::new(),
            grad: vec![T::zero(); config.dim],
            stats: EpochStats::default(),
        }
    }

    fn sentence(&mut self, sentence: &[u32], lr: f64) {
        self.kept.clear();
        for &w in sentence {
            if self.subsampler.keep(w, &mut self.rng) {
                self.kept.push(w);
            }
        }
        let lr = T::lit(lr);
        for i in 0..self.kept.len() {
            let radius = match self.config.window_mode {
                WindowMode::Sampled => self.rng.random_range(1..=self.config.window),
                WindowMode::Fixed => self.config.window,
            };
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(self.kept.len() - 1);
            let center = self.kept[i];
            for j in lo..=hi {
                if j != i {
                    let context = self.kept[j];
                    self.pair(center, context, lr);
                }
            }
        }
    }

    /// One positive pair plus `negatives` noise pairs for a center word.
    fn pair(&mut self, center: u32, context: u32, lr: T) {
        self.grad.iter_mut().for_each(|g| *g = T::zero());
        // Safety: single center row; each context row slice is dropped before
        // the next is taken.
        let v = unsafe { self.params.input_row(center) };
        for n in 0..=self.config.negatives {
            let (target, positive) = if n == 0 {
                (context, true)
            } else {
                let s = self.noise.sample(&mut self.rng);
                if s == context {
                    continue;
                }
                (s, false)
            };
            let u = unsafe { self.params.context_row(target) };
            let score = dot(v, u);
            let (coef, loss) = if positive {
                (sigmoid(score) - T::one(), -log_sigmoid(score))
            } else {
                (sigmoid(score), -log_sigmoid(-score))
            };
            self.stats.loss += loss.as_f64();
            self.stats.pairs += 1;
            let step = lr * coef;
            for ((g, ui), &vi) in self.grad.iter_mut().zip(u.iter_mut()).zip(v.iter()) {
                *g += coef * *ui;
                *ui -= step * vi;
            }
        }
        for (vi, &g) in v.iter_mut().zip(&self.grad) {
            *vi -= lr * g;
        }
    }
}
