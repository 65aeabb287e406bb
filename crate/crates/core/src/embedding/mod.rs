//! Skip-gram word vectors trained with negative sampling, and cosine
//! similarity over them.

mod config;
mod gradient;
mod io;
mod model;
mod sampling;
mod train;

pub use config::{EmbeddingConfig, WindowMode};
pub use gradient::{pair_gradient, pair_loss, PairGradient, PairLabel};
pub use io::{FORMAT_VERSION, MAGIC};
pub use model::{cosine, EmbeddingModel};
pub use sampling::{negative_sampling_distribution, subsample_discard_prob, NoiseSampler, Subsampler};
pub use train::{train, train_with_vocab, TrainReport, Trainer};
