//! Hierarchical and network structure of the portfolio.
//!
//! Eigenvector-sign partition trees with a uniform-bifurcation baseline,
//! correlation-derived distance metrics, Prim minimum spanning trees,
//! and single-linkage dendrograms whose cophenetic distances realize the
//! subdominant ultrametric.

mod distance;
mod linkage;
mod mst;
mod partition;

pub use distance::{euclid_dist, spectral_dist, DistanceMatrix};
pub use linkage::{
    cophenetic, leaf_order_correlation, single_linkage, ultrametric_check, Dendrogram, Merge,
    UltrametricReport,
};
pub use mst::{mst_prim, SpanningTree};
pub use partition::{cluster_count, fit_p0, sign_partition, trivial_count, P0Fit, PartitionNode, PartitionTree};
