//! Minutiae, core points and rigid motions of the plane.

use std::collections::HashSet;
use std::f64::consts::TAU;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate in minutia {0}")]
    NonFinite(usize),
    #[error("minutia {0} duplicates the position of an earlier minutia")]
    DuplicatePoint(usize),
    #[error("non-finite core point")]
    NonFiniteCore,
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn dist_sq(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinutiaKind {
    Ending,
    Bifurcation,
}

impl MinutiaKind {
    pub fn code(self) -> char {
        match self {
            MinutiaKind::Ending => 'E',
            MinutiaKind::Bifurcation => 'B',
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        match s {
            "E" => Some(MinutiaKind::Ending),
            "B" => Some(MinutiaKind::Bifurcation),
            _ => None,
        }
    }
}

/// A ridge ending or bifurcation. `theta` is the ridge direction in radians,
/// kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minutia {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub kind: MinutiaKind,
}

impl Minutia {
    pub fn new(x: f64, y: f64, theta: f64, kind: MinutiaKind) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
            kind,
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorePoint {
    pub x: f64,
    pub y: f64,
}

impl CorePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// The minutiae of one impression, optionally with its core point.
///
/// Positions are unique; construction through [`MinutiaeSet::new`] rejects
/// duplicates and non-finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct MinutiaeSet {
    minutiae: Vec<Minutia>,
    core: Option<CorePoint>,
    source_id: String,
}

fn position_key(x: f64, y: f64) -> (u64, u64) {
    // +0.0 folds -0.0 into 0.0 so both compare as the same position
    ((x + 0.0).to_bits(), (y + 0.0).to_bits())
}

impl MinutiaeSet {
    pub fn new(
        minutiae: Vec<Minutia>,
        core: Option<CorePoint>,
        source_id: impl Into<String>,
    ) -> Result<Self, GeometryError> {
        if let Some(c) = core {
            if !c.position().is_finite() {
                return Err(GeometryError::NonFiniteCore);
            }
        }
        let mut seen = HashSet::with_capacity(minutiae.len());
        for (i, m) in minutiae.iter().enumerate() {
            if !(m.x.is_finite() && m.y.is_finite() && m.theta.is_finite()) {
                return Err(GeometryError::NonFinite(i));
            }
            if !seen.insert(position_key(m.x, m.y)) {
                return Err(GeometryError::DuplicatePoint(i));
            }
        }
        let minutiae = minutiae
            .into_iter()
            .map(|m| Minutia {
                theta: normalize_angle(m.theta),
                ..m
            })
            .collect();
        Ok(Self {
            minutiae,
            core,
            source_id: source_id.into(),
        })
    }

    pub fn minutiae(&self) -> &[Minutia] {
        &self.minutiae
    }

    pub fn core(&self) -> Option<CorePoint> {
        self.core
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.minutiae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minutiae.is_empty()
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.minutiae.iter().map(Minutia::position).collect()
    }

    pub fn with_core(mut self, core: Option<CorePoint>) -> Self {
        self.core = core;
        self
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    /// Positions relative to `core` (the set's own core when `None`).
    pub fn core_relative_positions(&self, core: Option<CorePoint>) -> Option<Vec<Point2>> {
        let c = core.or(self.core)?;
        Some(
            self.minutiae
                .iter()
                .map(|m| Point2::new(m.x - c.x, m.y - c.y))
                .collect(),
        )
    }

    /// The same set expressed with the core at the origin.
    pub fn to_core_relative(&self, core: Option<CorePoint>) -> Option<MinutiaeSet> {
        let c = core.or(self.core)?;
        let minutiae = self
            .minutiae
            .iter()
            .map(|m| Minutia {
                x: m.x - c.x,
                y: m.y - c.y,
                ..*m
            })
            .collect();
        Some(MinutiaeSet {
            minutiae,
            core: Some(CorePoint::new(0.0, 0.0)),
            source_id: self.source_id.clone(),
        })
    }

    // Used by transforms, which are injective and keep values finite.
    pub(crate) fn from_parts_unchecked(
        minutiae: Vec<Minutia>,
        core: Option<CorePoint>,
        source_id: String,
    ) -> Self {
        Self {
            minutiae,
            core,
            source_id,
        }
    }
}

/// Rotation by `rotation` about `pivot`, followed by a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: f64,
    pub translation: (f64, f64),
    pub pivot: (f64, f64),
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn new(rotation: f64, translation: (f64, f64), pivot: (f64, f64)) -> Self {
        Self {
            rotation: normalize_angle(rotation),
            translation,
            pivot,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, (0.0, 0.0), (0.0, 0.0))
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self::new(0.0, (dx, dy), (0.0, 0.0))
    }

    pub fn rotation_about(angle: f64, px: f64, py: f64) -> Self {
        Self::new(angle, (0.0, 0.0), (px, py))
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    /// The transform undoing `self`.
    pub fn inverse(&self) -> Self {
        // T(p) = R(p - c) + c + t, so T^-1(q) = R^-1(q - (c + t)) + (c + t) - t
        let (dx, dy) = self.translation;
        let (px, py) = self.pivot;
        Self::new(-self.rotation, (-dx, -dy), (px + dx, py + dy))
    }

    pub fn apply_point(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = self.translation;
        if self.rotation == 0.0 {
            return (x + dx, y + dy);
        }
        let (s, c) = self.rotation.sin_cos();
        let (px, py) = self.pivot;
        let rx = x - px;
        let ry = y - py;
        (c * rx - s * ry + px + dx, s * rx + c * ry + py + dy)
    }
}

/// Applies `t` to every minutia and to the core; ridge directions turn with
/// the rotation.
pub fn apply_transform(set: &MinutiaeSet, t: &RigidTransform) -> MinutiaeSet {
    let minutiae = set
        .minutiae
        .iter()
        .map(|m| {
            let (x, y) = t.apply_point(m.x, m.y);
            let theta = if t.rotation == 0.0 {
                m.theta
            } else {
                normalize_angle(m.theta + t.rotation)
            };
            Minutia { x, y, theta, ..*m }
        })
        .collect();
    let core = set.core.map(|c| {
        let (x, y) = t.apply_point(c.x, c.y);
        CorePoint::new(x, y)
    });
    MinutiaeSet::from_parts_unchecked(minutiae, core, set.source_id.clone())
}
