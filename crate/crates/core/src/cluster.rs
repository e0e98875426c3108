//! k-means clustering of minutiae in the frame centred on the core point.
//!
//! Seeds are radial quantiles: points sorted by distance to the core (then
//! angle, then input order) and picked at ranks `floor((2i+1) n / 2k)`. The
//! distance key does not change under rotation about the core, so rotated
//! inputs produce the same seeds up to equal-radius ties.

use thiserror::Error;

use crate::geometry::{CorePoint, MinutiaeSet, Point2};

pub const MAX_ITERATIONS: usize = 500;
pub const DEFAULT_K: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("{n} points cannot form {k} clusters")]
    TooFewPoints { n: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("no core point available")]
    MissingCore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub k: usize,
    /// Core-relative centroids, indexed by cluster id.
    pub centroids: Vec<Point2>,
    /// Cluster id of each minutia, in input order.
    pub assignment: Vec<usize>,
    /// Sum of squared point-to-centroid distances.
    pub objective: f64,
    pub iterations: usize,
    /// Objective after each completed Lloyd step.
    pub history: Vec<f64>,
}

impl ClusterResult {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Radial-quantile seeds for `k` clusters of `points` (already core-relative).
pub fn radial_seed(points: &[Point2], k: usize) -> Vec<Point2> {
    let n = points.len();
    assert!(k >= 1 && n >= k, "radial_seed needs n >= k >= 1");
    let mut order: Vec<(f64, f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.norm(), p.y.atan2(p.x), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    (0..k)
        .map(|i| points[order[(2 * i + 1) * n / (2 * k)].2])
        .collect()
}

fn nearest(p: Point2, centroids: &[Point2]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = p.dist_sq(*c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

pub(crate) fn means(points: &[Point2], assignment: &[usize], k: usize) -> Vec<Point2> {
    let mut sum = vec![(0.0, 0.0, 0usize); k];
    for (p, &a) in points.iter().zip(assignment) {
        sum[a].0 += p.x;
        sum[a].1 += p.y;
        sum[a].2 += 1;
    }
    sum.into_iter()
        .map(|(x, y, n)| Point2::new(x / n as f64, y / n as f64))
        .collect()
}

pub fn objective(points: &[Point2], assignment: &[usize], centroids: &[Point2]) -> f64 {
    points
        .iter()
        .zip(assignment)
        .map(|(p, &a)| p.dist_sq(centroids[a]))
        .sum()
}

/// Moves a point into every empty cluster: the point farthest from its
/// current centroid among clusters that can spare one.
fn repair_empty(points: &[Point2], assignment: &mut [usize], centroids: &[Point2], k: usize) {
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignment.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let donor = (0..points.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .max_by(|&a, &b| {
                let da = points[a].dist_sq(centroids[assignment[a]]);
                let db = points[b].dist_sq(centroids[assignment[b]]);
                // first index wins among equals
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("n >= k leaves a cluster with two points");
        assignment[donor] = empty;
    }
}

/// Lloyd iterations from the given seeds. Assignment ties go to the lowest
/// centroid id; stops when no assignment changes or after
/// [`MAX_ITERATIONS`].
pub fn lloyd(points: &[Point2], seeds: Vec<Point2>) -> ClusterResult {
    let k = seeds.len();
    let mut centroids = seeds;
    let mut assignment = vec![usize::MAX; points.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let mut next: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids)).collect();
        if next == assignment {
            break;
        }
        repair_empty(points, &mut next, &centroids, k);
        assignment = next;
        centroids = means(points, &assignment, k);
        history.push(objective(points, &assignment, &centroids));
        iterations += 1;
    }
    ClusterResult {
        k,
        objective: objective(points, &assignment, &centroids),
        centroids,
        assignment,
        iterations,
        history,
    }
}

/// Clusters the minutiae of `set` into `k` groups around the core.
///
/// `core` overrides the set's own core point.
pub fn kmeans_fing(
    set: &MinutiaeSet,
    k: usize,
    core: Option<CorePoint>,
) -> Result<ClusterResult, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    let points = set
        .core_relative_positions(core)
        .ok_or(ClusterError::MissingCore)?;
    kmeans_points(&points, k)
}

/// [`kmeans_fing`] on points that are already core-relative.
pub fn kmeans_points(points: &[Point2], k: usize) -> Result<ClusterResult, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    if points.len() < k {
        return Err(ClusterError::TooFewPoints { n: points.len(), k });
    }
    Ok(lloyd(points, radial_seed(points, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Minutia, MinutiaKind};

    fn set_of(pts: &[(f64, f64)], core: Option<(f64, f64)>) -> MinutiaeSet {
        let ms = pts.iter().map(|&(x, y)| Minutia::new(x, y, 0.0, MinutiaKind::Ending)).collect();
        MinutiaeSet::new(ms, core.map(|(x, y)| CorePoint::new(x, y)), "t").unwrap()
    }

    #[test]
    fn two_symmetric_clusters() {
        let set = set_of(&[(0.0, 0.0), (0.0, 1.0), (10.0, 0.0), (10.0, 1.0)], Some((0.0, 0.0)));
        let r = kmeans_fing(&set, 2, None).unwrap();
        let mut cs: Vec<(f64, f64)> = r.centroids.iter().map(|c| (c.x, c.y)).collect();
        cs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(cs, vec![(0.0, 0.5), (10.0, 0.5)]);
        assert_eq!(r.objective, 1.0);
    }

    #[test]
    fn one_cluster_is_the_mean() {
        let pts = [(3.0, 4.0), (-1.0, 2.0), (7.5, -3.0), (0.25, 0.0)];
        let set = set_of(&pts, Some((1.0, 1.0)));
        let r = kmeans_fing(&set, 1, None).unwrap();
        let rel: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x - 1.0, y - 1.0)).collect();
        let mx = rel.iter().map(|p| p.0).sum::<f64>() / 4.0;
        let my = rel.iter().map(|p| p.1).sum::<f64>() / 4.0;
        assert!((r.centroids[0].x - mx).abs() < 1e-12 && (r.centroids[0].y - my).abs() < 1e-12);
        let var_n: f64 = rel.iter().map(|p| (p.0 - mx).powi(2) + (p.1 - my).powi(2)).sum();
        assert!((r.objective - var_n).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let set = set_of(&[(0.0, 0.0), (1.0, 1.0)], None);
        assert_eq!(kmeans_fing(&set, 1, None).unwrap_err(), ClusterError::MissingCore);
        assert!(kmeans_fing(&set, 1, Some(CorePoint::new(0.0, 0.0))).is_ok());
        let set = set.with_core(Some(CorePoint::new(0.0, 0.0)));
        assert_eq!(kmeans_fing(&set, 3, None).unwrap_err(), ClusterError::TooFewPoints { n: 2, k: 3 });
        assert_eq!(kmeans_fing(&set, 0, None).unwrap_err(), ClusterError::ZeroClusters);
    }

    #[test]
    fn seeds_when_n_equals_k() {
        let pts = vec![Point2::new(3.0, 0.0), Point2::new(0.0, 1.0), Point2::new(-2.0, 0.0)];
        let mut seeds = radial_seed(&pts, 3);
        seeds.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut expect = pts.clone();
        expect.sort_by(|a, b| a.x.total_cmp(&b.x));
        assert_eq!(seeds, expect);
    }

    #[test]
    fn single_seed_is_median_radius() {
        let pts: Vec<Point2> = [5.0, 1.0, 4.0, 2.0, 3.0].iter().map(|&r| Point2::new(r, 0.0)).collect();
        assert_eq!(radial_seed(&pts, 1), vec![Point2::new(3.0, 0.0)]);
    }

    #[test]
    fn circle_seeds_follow_angle_ranks() {
        // all eight have radius exactly 10; angle order by hand:
        // (-8,-6) (0,-10) (10,0) (8,6) (6,8) (0,10) (-6,8) (-10,0)
        let pts: Vec<Point2> = [(10.0, 0.0), (8.0, 6.0), (6.0, 8.0), (0.0, 10.0), (-6.0, 8.0), (-10.0, 0.0), (-8.0, -6.0), (0.0, -10.0)]
            .iter()
            .map(|&(x, y)| Point2::new(x, y))
            .collect();
        // ranks floor((2i+1)*8/4) = 2 and 6
        assert_eq!(radial_seed(&pts, 2), vec![Point2::new(10.0, 0.0), Point2::new(-6.0, 8.0)]);
    }

    #[test]
    fn fixed_point_and_invariants() {
        let pts: Vec<Point2> = (0..25)
            .map(|i| {
                let t = i as f64;
                Point2::new((t * 1.7).sin() * 40.0 + t, (t * 0.9).cos() * 30.0)
            })
            .collect();
        let r = kmeans_points(&pts, 4).unwrap();
        assert!(r.cluster_sizes().iter().all(|&s| s > 0));
        let recomputed = means(&pts, &r.assignment, r.k);
        for (a, b) in r.centroids.iter().zip(&recomputed) {
            assert!(a.dist(*b) < 1e-9);
        }
        assert!((objective(&pts, &r.assignment, &r.centroids) - r.objective).abs() < 1e-9);
        let again = lloyd(&pts, r.centroids.clone());
        assert_eq!(again.assignment, r.assignment);
        assert_eq!(again.centroids, r.centroids);
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0));
        }
    }

    #[test]
    fn empty_cluster_repair() {
        // two seeds coincide in position so one cluster starts empty
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(0.0, 0.0), Point2::new(9.0, 0.0)];
        let r = lloyd(&pts, vec![Point2::new(0.0, 0.0), Point2::new(0.0, 0.0)]);
        assert!(r.cluster_sizes().iter().all(|&s| s > 0));
        assert_eq!(r.assignment, vec![0, 0, 1]);
    }
}
