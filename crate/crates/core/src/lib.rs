//! Fingerprint enrollment and verification toolkit.
//!
//! Two matching levels are provided. The coarse level classifies a
//! fingerprint from its block orientation field with a self-organizing map
//! (plain or certainty-weighted). The fine level clusters the minutiae
//! around the core point, turns the cluster centroids into a nearest
//! neighbour graph, derives a four-parameter index from that graph and
//! compares templates with graph isomorphism and (modified) Hausdorff
//! distances.
//!
//! Batch work (pair scoring, block gradients, feature extraction) goes
//! through [`par::Execution`], which uses rayon when the `parallel` feature
//! is enabled and a plain sequential loop otherwise.

pub mod cluster;
pub mod eval;
pub mod geometry;
pub mod graph;
pub mod hausdorff;
pub mod minfile;
pub mod orientation;
pub mod par;
pub mod pgm;
pub mod som;
pub mod store;
pub mod synth;
pub mod verify;

mod numfmt;

pub use cluster::{kmeans_fing, radial_seed, ClusterError, ClusterResult};
pub use geometry::{
    apply_transform, CorePoint, GeometryError, Minutia, MinutiaKind, MinutiaeSet, Point2,
    RigidTransform,
};
pub use graph::{
    build_nn_graph, compute_index, dist_matrix, fingerprint_distance, index_string, is_isomorphic,
    DistanceMatrix, GraphError, GraphIndex, MinutiaeGraph,
};
pub use hausdorff::{
    directed_hausdorff, directed_modified_hausdorff, hausdorff, match_decision,
    modified_hausdorff, Decision, MatchError, MatchScore,
};
pub use minfile::{parse_minutiae, serialize_minutiae, MinFileError};
pub use orientation::{
    detect_core, estimate_block_directions, extract_feature_vector, segment_by_certainty,
    CoreDetection, FeatureVector, FingerprintClass, GrayImage, OrientationError,
    OrientationField,
};
pub use par::Execution;
pub use som::{SomError, SomMap, TrainConfig};
