//! Word Embedding Language Divergence (WELD).
//!
//! Languages are compared through the cosine similarities of their word
//! vectors: each language yields a probability distribution over pairs of
//! aligned words, two languages are as far apart as the Jensen-Shannon
//! divergence of their distributions, and a set of languages is clustered
//! with UPGMA.
//!
//! The numeric types are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar used by the command-line pipeline.

pub mod alignment;
pub mod clustering;
pub mod corpus;
pub mod divergence;
pub mod embedding;
mod error;
pub mod pipeline;
pub mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::Real;

pub type EmbeddingModelF32 = embedding::EmbeddingModel<f32>;
pub type EmbeddingModelF64 = embedding::EmbeddingModel<f64>;
pub type SimilarityDistributionF32 = divergence::SimilarityDistribution<f32>;
pub type SimilarityDistributionF64 = divergence::SimilarityDistribution<f64>;
pub type DistanceMatrixF32 = divergence::DistanceMatrix<f32>;
pub type DistanceMatrixF64 = divergence::DistanceMatrix<f64>;
pub type DendrogramF32 = clustering::Dendrogram<f32>;
pub type DendrogramF64 = clustering::Dendrogram<f64>;
