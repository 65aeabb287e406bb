//! UPGMA clustering of distance matrices and dendrogram output.

mod render;
mod upgma;

pub use render::{render_dendrogram, to_newick, Annotations, RenderFormat, Rendered};
pub use upgma::{upgma, Dendrogram, Merge, NodeId};
