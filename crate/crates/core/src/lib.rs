//! Relative forest accessibilities of weighted multigraphs and multidigraphs.
//!
//! The accessibility matrix `Q = (I + alpha L)^{-1}` of a graph with Kirchhoff
//! matrix `L` measures vertex proximity by counting spanning rooted forests.
//! Around it the crate provides the forest distance, rank-one updates under
//! edge-weight increments, the routes-with-drains series expansion,
//! sociometric indices, and a brute-force forest enumerator used as an
//! independent oracle.

pub mod cli;
pub mod config;
pub mod enumerate;
pub mod forest;
pub mod graph;
pub mod indices;
pub mod io;
pub mod lu;
pub mod perturbation;
pub mod rwd;

pub use enumerate::{oracle_q, EnumLimits, SpanningForest};
pub use forest::{
    block_structure, forest_accessibility, forest_accessibility_with, forest_distance, AccessibilityResult,
    DistanceMatrix, ForestError, Tolerances,
};
pub use graph::{Edge, GraphError, KirchhoffMatrix, WeightedMultigraph};
pub use indices::{classical_indices, derivative_indices, IndexReport};
pub use perturbation::{apply_increment, rank_one_certificate, EdgeIncrement};
