//! Similarity distributions over aligned word pairs and the Jensen-Shannon
//! distance between languages.

mod distribution;
mod jsd;
mod matrix;

pub use distribution::{
    pair_index, shared_pivot_table, similarity_distribution, unresolvable_pivots, SimilarityDistribution,
};
pub use jsd::{entropy, jsd};
pub use matrix::{distance_matrix, weld_distance, DistanceMatrix, PivotScope};
