//! Networks and their weights matrices.
//!
//! Generators return a [`Graph`] (undirected, no self-loops, optional
//! nonnegative weights); [`row_normalize`] turns it into the
//! [`WeightsMatrix`] a SAR process consumes.

mod distance;
mod fcap;
mod generators;
mod graph;
mod lattice;
mod weights;

pub use distance::{geodesic_distances, shell_sizes, DistanceKind, DistanceMatrix, UNREACHABLE};
pub use fcap::{fcap_graph, Holding};
pub use generators::{gen_er, gen_sbm, gen_triangle, sbm_auto_blocks, SbmGraph};
pub use graph::Graph;
pub use lattice::{gen_lattice, LatticeConfig, WeightScheme};
pub use weights::{row_normalize, Provenance, WeightsMatrix, NORMALIZATION_TOLERANCE, SPARSE_DENSITY};
