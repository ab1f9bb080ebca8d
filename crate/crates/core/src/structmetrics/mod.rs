//! Correlation statistics, partition agreement, the dendrogram-based
//! structural similarity between embedding sets, and hierarchy-aware
//! evaluation protocols.

mod correlation;
mod hierarchy;
mod protocols;
mod rand_index;
mod similarity;

pub use correlation::{cophenetic_correlation, correlation, kendall_tau_b, pearson, spearman, CorrKind};
pub use hierarchy::Hierarchy;
pub use protocols::{hierarchical_rand, knn_hierarchical_classify, rand_sweep};
pub use rand_index::rand_index;
pub use similarity::{lca_similarity, structural_similarity, LcaSimilarity, SimilarityConfig, SimilarityReport};
