//! Template construction and the three-gate verification used by the store
//! and the evaluation harness.
//!
//! A template is the cluster graph of a fingerprint's core-relative minutiae.
//! Verification checks, in order: equal index string (bucket), isomorphic
//! graphs, and modified Hausdorff distance within the threshold after the
//! probe has been rotated onto the template.

use std::fmt;

use thiserror::Error;

use crate::cluster::{kmeans_fing, ClusterError};
use crate::geometry::{apply_transform, normalize_angle, CorePoint, MinutiaeSet, Point2, RigidTransform};
use crate::graph::{
    build_nn_graph, compute_index, dist_matrix, index_string, is_isomorphic, GraphError,
    GraphIndex, MinutiaeGraph,
};
use crate::hausdorff::{match_decision, modified_hausdorff, Decision, MatchError, MatchScore};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Everything derived from one impression at enrollment.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    /// Core-relative centroids, by cluster id.
    pub centroids: Vec<Point2>,
    pub graph: MinutiaeGraph,
    pub index: GraphIndex,
    pub index_key: String,
    /// The minutiae with the core moved to the origin.
    pub minutiae: MinutiaeSet,
}

/// Clusters, builds the graph and derives the index for `set`.
///
/// `core` overrides the set's own core point.
pub fn build_template(set: &MinutiaeSet, k: usize, core: Option<CorePoint>) -> Result<Template, PipelineError> {
    let clusters = kmeans_fing(set, k, core)?;
    let graph = build_nn_graph(&dist_matrix(&clusters.centroids))?;
    let index = compute_index(&graph);
    let minutiae = set
        .to_core_relative(core)
        .ok_or(ClusterError::MissingCore)?;
    Ok(Template {
        centroids: clusters.centroids,
        index_key: index_string(&index),
        index,
        graph,
        minutiae,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    IndexBucket,
    Isomorphism,
    Distance,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::IndexBucket => "index",
            Gate::Isomorphism => "isomorphism",
            Gate::Distance => "distance",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOutcome {
    pub gate: Gate,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub score: MatchScore,
    pub decision: Decision,
    pub trace: Vec<GateOutcome>,
    /// Rotation (radians) applied to the probe before distances were taken.
    pub alignment: f64,
}

impl Verification {
    pub fn first_failure(&self) -> Option<Gate> {
        self.trace.iter().find(|g| !g.passed).map(|g| g.gate)
    }
}

/// Gate results before a threshold is applied; `decide` turns them into a
/// decision for any `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEvidence {
    pub probe_index_key: String,
    pub index_match: bool,
    pub isomorphic: bool,
    pub alignment: f64,
    pub aligned_probe: MinutiaeSet,
}

impl PairEvidence {
    pub fn decide(&self, template: &Template, tau: f64) -> Result<Verification, PipelineError> {
        let score = match_decision(&self.aligned_probe, &template.minutiae, tau)?;
        let trace = vec![
            GateOutcome {
                gate: Gate::IndexBucket,
                passed: self.index_match,
                detail: format!("probe {} vs template {}", self.probe_index_key, template.index_key),
            },
            GateOutcome {
                gate: Gate::Isomorphism,
                passed: self.isomorphic,
                detail: format!("fingerprint distance {}", u8::from(!self.isomorphic)),
            },
            GateOutcome {
                gate: Gate::Distance,
                passed: score.decision == Decision::Accept,
                detail: format!("mhd {:.4} vs tau {}", score.mhd, tau),
            },
        ];
        let decision = if trace.iter().all(|g| g.passed) {
            Decision::Accept
        } else {
            Decision::Reject
        };
        Ok(Verification {
            score,
            decision,
            trace,
            alignment: self.alignment,
        })
    }
}

/// Least-squares rotation about the origin taking `from[i]` onto `to[i]`.
pub fn centroid_rotation(from: &[Point2], to: &[Point2]) -> f64 {
    let (mut cross, mut dot) = (0.0, 0.0);
    for (p, q) in from.iter().zip(to) {
        cross += p.x * q.y - p.y * q.x;
        dot += p.x * q.x + p.y * q.y;
    }
    if cross == 0.0 && dot == 0.0 {
        0.0
    } else {
        cross.atan2(dot)
    }
}

/// Rotation about the origin that best lays `probe` onto `template`.
///
/// Cluster ids need not correspond between impressions, so every pairing of
/// a probe centroid with a template centroid proposes an angle, next to the
/// least-squares angle over ids. The candidate with the smallest modified
/// Hausdorff distance is then refined by least squares over nearest
/// neighbours while that keeps improving the distance.
pub fn estimate_alignment(probe: &Template, template: &Template) -> f64 {
    let a = probe.minutiae.positions();
    let b = template.minutiae.positions();
    let cost = |angle: f64| {
        let (s, c) = angle.sin_cos();
        let rotated: Vec<Point2> = a.iter().map(|p| Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)).collect();
        modified_hausdorff(&rotated, &b).unwrap_or(f64::INFINITY)
    };
    let mut candidates = vec![centroid_rotation(&probe.centroids, &template.centroids)];
    for p in &probe.centroids {
        for q in &template.centroids {
            if p.norm() > 0.0 && q.norm() > 0.0 {
                candidates.push(q.y.atan2(q.x) - p.y.atan2(p.x));
            }
        }
    }
    let (mut best, mut best_cost) = (0.0, f64::INFINITY);
    for angle in candidates {
        let c = cost(angle);
        if c < best_cost {
            (best, best_cost) = (angle, c);
        }
    }
    for _ in 0..10 {
        let (s, c) = best.sin_cos();
        let rotated: Vec<Point2> = a.iter().map(|p| Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)).collect();
        let nearest: Vec<Point2> = rotated
            .iter()
            .map(|p| *b.iter().min_by(|u, v| p.dist_sq(**u).total_cmp(&p.dist_sq(**v))).expect("non-empty"))
            .collect();
        let step = best + centroid_rotation(&rotated, &nearest);
        let step_cost = cost(step);
        if step_cost >= best_cost {
            break;
        }
        (best, best_cost) = (step, step_cost);
    }
    normalize_angle(best)
}

/// Builds the probe's template with the template's cluster count, runs the
/// index and isomorphism gates and rotates the probe onto the template.
pub fn gather_evidence(probe: &MinutiaeSet, template: &Template) -> Result<PairEvidence, PipelineError> {
    let k = template.centroids.len();
    let probe_t = build_template(probe, k, None)?;
    let index_match = probe_t.index_key == template.index_key;
    let isomorphic = is_isomorphic(&probe_t.graph, &template.graph);
    let alignment = estimate_alignment(&probe_t, template);
    let aligned_probe = apply_transform(&probe_t.minutiae, &RigidTransform::rotation_about(alignment, 0.0, 0.0));
    Ok(PairEvidence {
        probe_index_key: probe_t.index_key,
        index_match,
        isomorphic,
        alignment,
        aligned_probe,
    })
}

pub fn verify_against(probe: &MinutiaeSet, template: &Template, tau: f64) -> Result<Verification, PipelineError> {
    gather_evidence(probe, template)?.decide(template, tau)
}
