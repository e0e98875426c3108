//! Hausdorff and modified Hausdorff distances between minutiae point sets,
//! and the thresholded match decision built on them.

use thiserror::Error;

use crate::geometry::{MinutiaeSet, Point2};

/// Default acceptance threshold on the modified Hausdorff distance, pixels.
pub const DEFAULT_TAU: f64 = 12.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("point set is empty")]
    EmptySet,
    #[error("no core point available")]
    MissingCore,
    #[error("threshold must be positive and finite")]
    InvalidThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchScore {
    pub hausdorff: f64,
    pub mhd: f64,
    pub directed_ab: f64,
    pub directed_ba: f64,
    pub decision: Decision,
    pub threshold_used: f64,
}

fn nearest_dist(p: Point2, set: &[Point2]) -> f64 {
    set.iter().map(|&q| p.dist(q)).fold(f64::INFINITY, f64::min)
}

fn non_empty(a: &[Point2], b: &[Point2]) -> Result<(), MatchError> {
    if a.is_empty() || b.is_empty() {
        Err(MatchError::EmptySet)
    } else {
        Ok(())
    }
}

/// `max_{a in A} min_{b in B} |a - b|`.
pub fn directed_hausdorff(a: &[Point2], b: &[Point2]) -> Result<f64, MatchError> {
    non_empty(a, b)?;
    Ok(a.iter()
        .map(|&p| nearest_dist(p, b))
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn hausdorff(a: &[Point2], b: &[Point2]) -> Result<f64, MatchError> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// Mean over `A` of the distance to the nearest point of `B`.
pub fn directed_modified_hausdorff(a: &[Point2], b: &[Point2]) -> Result<f64, MatchError> {
    non_empty(a, b)?;
    let total: f64 = a.iter().map(|&p| nearest_dist(p, b)).sum();
    Ok(total / a.len() as f64)
}

/// Larger of the two directed mean distances.
pub fn modified_hausdorff(a: &[Point2], b: &[Point2]) -> Result<f64, MatchError> {
    Ok(directed_modified_hausdorff(a, b)?.max(directed_modified_hausdorff(b, a)?))
}

/// All distances between two point sets and the decision `mhd <= tau`.
pub fn score_points(a: &[Point2], b: &[Point2], tau: f64) -> Result<MatchScore, MatchError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(MatchError::InvalidThreshold);
    }
    non_empty(a, b)?;
    // one pass per direction yields both the max and the mean of the minima
    let pass = |from: &[Point2], to: &[Point2]| {
        let mins: Vec<f64> = from.iter().map(|&p| nearest_dist(p, to)).collect();
        let max = mins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = mins.iter().sum::<f64>() / from.len() as f64;
        (max, mean)
    };
    let (directed_ab, mean_ab) = pass(a, b);
    let (directed_ba, mean_ba) = pass(b, a);
    let mhd = mean_ab.max(mean_ba);
    Ok(MatchScore {
        hausdorff: directed_ab.max(directed_ba),
        mhd,
        directed_ab,
        directed_ba,
        decision: if mhd <= tau { Decision::Accept } else { Decision::Reject },
        threshold_used: tau,
    })
}

/// Compares the two sets in their core-relative frames; Accept iff the
/// modified Hausdorff distance is at most `tau`.
pub fn match_decision(probe: &MinutiaeSet, template: &MinutiaeSet, tau: f64) -> Result<MatchScore, MatchError> {
    let a = probe.core_relative_positions(None).ok_or(MatchError::MissingCore)?;
    let b = template.core_relative_positions(None).ok_or(MatchError::MissingCore)?;
    score_points(&a, &b, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CorePoint, Minutia, MinutiaKind};

    fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    fn set(v: &[(f64, f64)], core: (f64, f64)) -> MinutiaeSet {
        let ms = v.iter().map(|&(x, y)| Minutia::new(x, y, 0.0, MinutiaKind::Ending)).collect();
        MinutiaeSet::new(ms, Some(CorePoint::new(core.0, core.1)), "s").unwrap()
    }

    #[test]
    fn directed_examples() {
        let m = pts(&[(0.0, 0.0), (1.0, 0.0)]);
        let n = pts(&[(0.0, 0.0)]);
        assert_eq!(directed_hausdorff(&m, &m).unwrap(), 0.0);
        assert_eq!(directed_hausdorff(&m, &n).unwrap(), 1.0);
        assert_eq!(directed_hausdorff(&n, &m).unwrap(), 0.0);
        assert_eq!(hausdorff(&m, &n).unwrap(), 1.0);
        assert_eq!(hausdorff(&pts(&[(0.0, 0.0)]), &pts(&[(3.0, 4.0)])).unwrap(), 5.0);
    }

    #[test]
    fn mhd_vs_hausdorff_with_outlier() {
        let m = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (100.0, 0.0)]);
        let n = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert_eq!(directed_modified_hausdorff(&m, &n).unwrap(), 24.5);
        assert_eq!(directed_hausdorff(&m, &n).unwrap(), 98.0);
        assert_eq!(modified_hausdorff(&m, &m).unwrap(), 0.0);
        let single = modified_hausdorff(&pts(&[(1.0, 1.0)]), &pts(&[(4.0, 5.0)])).unwrap();
        assert_eq!(single, 5.0);
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(hausdorff(&[], &pts(&[(0.0, 0.0)])).unwrap_err(), MatchError::EmptySet);
        assert_eq!(modified_hausdorff(&pts(&[(0.0, 0.0)]), &[]).unwrap_err(), MatchError::EmptySet);
    }

    #[test]
    fn decisions() {
        let a = set(&[(10.0, 10.0), (20.0, 5.0), (3.0, 40.0)], (0.0, 0.0));
        let s = match_decision(&a, &a, 0.001).unwrap();
        assert_eq!((s.mhd, s.decision), (0.0, Decision::Accept));

        // same geometry, different absolute position: core-relative frames agree
        let moved = set(&[(110.0, 60.0), (120.0, 55.0), (103.0, 90.0)], (100.0, 50.0));
        assert_eq!(match_decision(&moved, &a, 1.0).unwrap().mhd, 0.0);

        let far = set(&[(500.0, 500.0), (520.0, 510.0)], (0.0, 0.0));
        assert_eq!(match_decision(&far, &a, DEFAULT_TAU).unwrap().decision, Decision::Reject);

        let no_core = MinutiaeSet::new(a.minutiae().to_vec(), None, "x").unwrap();
        assert_eq!(match_decision(&no_core, &a, 1.0).unwrap_err(), MatchError::MissingCore);
        assert_eq!(match_decision(&a, &a, 0.0).unwrap_err(), MatchError::InvalidThreshold);
    }

    #[test]
    fn outlier_in_template() {
        let probe: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 * 7.0, (i * i) as f64 % 13.0)).collect();
        let mut template = probe.clone();
        template.push((400.0, 0.0));
        let s = match_decision(&set(&probe, (0.0, 0.0)), &set(&template, (0.0, 0.0)), DEFAULT_TAU).unwrap();
        let d_out = nearest_dist(Point2::new(400.0, 0.0), &pts(&probe));
        assert_eq!(s.hausdorff, d_out);
        assert!(s.mhd <= d_out / probe.len() as f64);
        assert!(s.mhd <= s.hausdorff);
    }
}
